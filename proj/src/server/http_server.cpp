#include <httplib.h>

#include "lexrisk/error.hpp"
#include "lexrisk/server.hpp"

namespace lexrisk {

void run_http_server(Service& service, const std::string& host, int port) {
  httplib::Server server;
  auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
    HttpRequest r{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    const auto out = service.handle(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
  server.Get(".*", dispatch);
  server.Post(".*", dispatch);
  if (!server.listen(host, port)) fail(ErrorCode::io, "cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace lexrisk
