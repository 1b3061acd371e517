#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "lexrisk/binary_io.hpp"
#include "lexrisk/error.hpp"
#include "lexrisk/server.hpp"
#include "lexrisk/synthetic.hpp"

using namespace lexrisk;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const CategoryRegistry kCategories({"Termination", "Indemnity", "Insurance"});

EndToEndConfig fast_config() {
  EndToEndConfig c;
  c.embedding.architecture = Architecture::dbow;
  c.embedding.negative = 5;
  c.embedding.subsample = 0.0;
  c.embedding.window = 3;
  c.embedding.dim = 20;
  c.embedding.min_count = 1;
  c.embedding.epochs = 15;
  return c;
}

Clock ticking_clock() {
  auto t = std::make_shared<std::int64_t>(1'700'000'000'000);
  return [t] { return (*t)++; };
}

PipelineOptions options(std::optional<fs::path> dir = std::nullopt) {
  PipelineOptions o;
  o.config = fast_config();
  o.state_dir = std::move(dir);
  o.clock = ticking_clock();
  return o;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("lexrisk-srv-" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

HttpResponse call(Service& s, std::string method, std::string path, const json& body = nullptr,
                  std::map<std::string, std::string> query = {}) {
  return s.handle({std::move(method), std::move(path), std::move(query), body.is_null() ? "" : body.dump()});
}

std::string error_code(const HttpResponse& r) { return json::parse(r.body).at("error").at("code").get<std::string>(); }

ApiErrorCode thrown_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const ApiError& e) {
    return e.code();
  }
  FAIL("no ApiError thrown");
  return ApiErrorCode::internal;
}

// Service with trained Termination and Indemnity models; Insurance has none.
Service& trained() {
  static const auto s = [] {
    auto svc = std::make_unique<Service>(kCategories, options());
    synthetic::TwoTopicOptions o;
    o.paragraphs = 120;
    svc->pipeline().seed(ingest_labeled(synthetic::two_topic_corpus(o), kCategories, {}, 5));
    REQUIRE(call(*svc, "POST", "/v1/categories/Termination/retrain").status == 200);
    REQUIRE(call(*svc, "POST", "/v1/categories/Indemnity/retrain").status == 200);
    return svc;
  }();
  return *s;
}

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int rc = cli::run(args, o, e);
  if (out) *out = o.str();
  if (rc != 0) MESSAGE("cli stderr: " << e.str());
  return rc;
}

}  // namespace

TEST_CASE("paragraph splitting") {
  CHECK(split_paragraphs("First paragraph\nstill first.\n\nSecond one.") ==
        std::vector<std::string>{"First paragraph\nstill first.", "Second one."});
  CHECK(split_paragraphs("  a \n \t \n\n\nb\n\n") == std::vector<std::string>{"a", "b"});
  CHECK(split_paragraphs("a\r\n\r\nb") == std::vector<std::string>{"a", "b"});
  CHECK(split_paragraphs("a||b|| ||c", std::string("||")) == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_paragraphs(" \n\n ").empty());
}

TEST_CASE("upload, repository and verbatim text") {
  Service s(kCategories, options());
  auto r = call(s, "GET", "/v1/documents");
  CHECK(r.status == 200);
  CHECK(json::parse(r.body)["documents"].empty());

  const std::string text = "Clause one ünïcode\tTab.\n\nClause two.\n";
  r = call(s, "POST", "/v1/documents", json{{"text", text}, {"title", "Lease"}});
  REQUIRE(r.status == 201);
  const auto doc = json::parse(r.body);
  CHECK(doc["paragraphs"].size() == 2);
  const auto id = doc["doc_id"].get<std::string>();

  r = call(s, "GET", "/v1/documents/" + id);
  CHECK(r.status == 200);
  CHECK(json::parse(r.body)["text"].get<std::string>() == text);
  CHECK(s.document(id).text == text);

  r = call(s, "POST", "/v1/documents", json{{"text", "  \n\n "}});
  CHECK(r.status == 400);
  CHECK(error_code(r) == "empty_document");
  CHECK(thrown_code([&] { s.upload("", "x"); }) == ApiErrorCode::empty_document);

  s.upload("b", "second");
  s.upload("c", "third");
  const auto list = json::parse(call(s, "GET", "/v1/documents").body)["documents"];
  REQUIRE(list.size() == 3);
  for (std::size_t i = 1; i < list.size(); ++i)
    CHECK(list[i - 1]["uploaded_at"].get<std::int64_t>() >= list[i]["uploaded_at"].get<std::int64_t>());
  CHECK(list[0]["title"] == "third");
  CHECK(list[2]["title"] == "Lease");
}

TEST_CASE("analyze errors") {
  auto& s = trained();
  const auto id = s.upload("Some text here.", "t").doc_id;
  auto r = call(s, "POST", "/v1/documents/doc-missing/analyze", json::object());
  CHECK(r.status == 404);
  CHECK(error_code(r) == "not_found");
  r = call(s, "POST", "/v1/documents/" + id + "/analyze", json{{"threshold", 1.01}});
  CHECK(r.status == 400);
  CHECK(error_code(r) == "bad_threshold");
  CHECK(error_code(call(s, "POST", "/v1/documents/" + id + "/analyze", json{{"threshold", -0.1}})) == "bad_threshold");
  CHECK(error_code(call(s, "POST", "/v1/documents/" + id + "/analyze", json{{"threshold", "high"}})) ==
        "bad_threshold");
  r = call(s, "POST", "/v1/documents/" + id + "/analyze", json{{"categories", {"Insurance"}}});
  CHECK(r.status == 409);
  CHECK(error_code(r) == "no_model");
  CHECK(error_code(call(s, "POST", "/v1/documents/" + id + "/analyze", json{{"categories", {"Bogus"}}})) ==
        "unknown_category");
  CHECK(error_code(call(s, "POST", "/v1/documents/" + id + "/analyze", "{not json")) == "bad_request");
}

TEST_CASE("analysis of a planted document returns the planted paragraphs") {
  auto& s = trained();
  const auto planted = synthetic::planted_document(20, 3, 11);
  const auto doc = s.upload(planted.text, "planted");
  REQUIRE(doc.paragraphs.size() == 20);
  const auto r = call(s, "POST", "/v1/documents/" + doc.doc_id + "/analyze",
                      json{{"categories", {"Termination"}}, {"threshold", 0.5}});
  REQUIRE(r.status == 200);
  const auto body = json::parse(r.body);
  REQUIRE(body["categories"].size() == 1);
  CHECK(body["categories"][0]["model_version"] == "Termination@v1");
  std::set<std::size_t> got;
  double last = 1.0;
  for (const auto& f : body["categories"][0]["findings"]) {
    got.insert(f["paragraph_index"].get<std::size_t>());
    CHECK(f["probability"].get<double>() <= last);
    last = f["probability"].get<double>();
  }
  CHECK(got == std::set<std::size_t>(planted.planted.begin(), planted.planted.end()));
  CHECK(s.document(doc.doc_id).analyzed);

  // Default categories: every category with a model, unmodeled ones skipped.
  const auto all = json::parse(call(s, "POST", "/v1/documents/" + doc.doc_id + "/analyze", json::object()).body);
  REQUIRE(all["categories"].size() == 2);
  CHECK(all["categories"][1]["category"] == "Indemnity");
  CHECK(all["categories"][1]["findings"].size() == 17);
}

TEST_CASE("review through the API") {
  auto& s = trained();
  const auto planted = synthetic::planted_document(6, 2, 3);
  const auto id = s.upload(planted.text, "review").doc_id;
  const auto a = s.analyze(id, {"Termination"}, 0.0);
  REQUIRE(a.findings.size() == 6);
  const auto before = s.pipeline().store().size();

  const std::string comment = "Überprüft: clause 4 \xE2\x80\x94 ok \xF0\x9F\x91\x8D\n\"quoted\"";
  auto r = call(s, "POST", "/v1/findings/" + a.findings[0].finding_id + "/review",
                json{{"verdict", "accept"}, {"comment", comment}});
  REQUIRE(r.status == 200);
  CHECK(json::parse(r.body)["status"] == "accepted");
  CHECK(json::parse(r.body)["comment"].get<std::string>() == comment);
  CHECK(s.pipeline().store().size() == before + 1);
  const auto last = s.pipeline().store().records().back();
  CHECK(last.origin == Origin::review_accept);
  CHECK(last.label);

  r = call(s, "POST", "/v1/findings/" + a.findings[0].finding_id + "/review", json{{"verdict", "reject"}});
  CHECK(r.status == 409);
  CHECK(error_code(r) == "already_reviewed");
  CHECK(s.pipeline().store().size() == before + 1);

  r = call(s, "POST", "/v1/findings/" + a.findings[1].finding_id + "/review", json{{"verdict", "decline"}});
  REQUIRE(r.status == 200);
  CHECK(json::parse(r.body)["status"] == "rejected");
  CHECK(s.pipeline().store().records().back().origin == Origin::review_reject);

  CHECK(error_code(call(s, "POST", "/v1/findings/f-nope/review", json{{"verdict", "accept"}})) == "not_found");
  CHECK(error_code(call(s, "POST", "/v1/findings/" + a.findings[2].finding_id + "/review",
                        json{{"verdict", "maybe"}})) == "bad_request");

  const auto listed = json::parse(call(s, "GET", "/v1/documents/" + id + "/findings").body)["findings"];
  REQUIRE(listed.size() == 6);
  const auto stored = s.findings(id);
  const auto it = std::find_if(stored.begin(), stored.end(),
                               [&](const Finding& f) { return f.finding_id == a.findings[0].finding_id; });
  REQUIRE(it != stored.end());
  CHECK(it->comment == comment);
}

TEST_CASE("export") {
  auto& s = trained();
  CHECK(error_code(call(s, "GET", "/v1/documents/doc-none/export")) == "not_found");

  const auto planted = synthetic::planted_document(10, 4, 21);
  const auto id = s.upload(planted.text, "export me").doc_id;
  auto r = call(s, "GET", "/v1/documents/" + id + "/export");
  REQUIRE(r.status == 200);
  CHECK(r.content_type.rfind("text/tab-separated-values", 0) == 0);
  CHECK(parse_report(r.body).findings.empty());
  CHECK(parse_report(r.body).title == "export me");

  CHECK(error_code(call(s, "GET", "/v1/documents/" + id + "/export", nullptr, {{"format", "pdf"}})) == "bad_request");

  const auto body = json::parse(call(s, "POST", "/v1/documents/" + id + "/analyze", json{{"threshold", 0.0}}).body);
  std::map<std::string, double> analyzed;
  for (const auto& g : body["categories"])
    for (const auto& f : g["findings"]) analyzed[f["finding_id"]] = f["probability"].get<double>();
  CHECK(analyzed.size() == 20);
  const auto report = parse_report(call(s, "GET", "/v1/documents/" + id + "/export").body);
  REQUIRE(report.findings.size() == analyzed.size());
  for (const auto& f : report.findings) CHECK(analyzed.at(f.finding_id) == f.probability);

  r = call(s, "GET", "/v1/documents/" + id + "/export", nullptr, {{"format", "text"}});
  CHECK(r.status == 200);
  CHECK(r.content_type.rfind("text/plain", 0) == 0);
  CHECK(r.body.find("export me") != std::string::npos);
}

TEST_CASE("categories, manual examples and retraining") {
  Service s(kCategories, options());
  synthetic::TwoTopicOptions o;
  o.paragraphs = 60;
  s.pipeline().seed(ingest_labeled(synthetic::two_topic_corpus(o), kCategories, {}, 5));
  auto cats = json::parse(call(s, "GET", "/v1/categories").body)["categories"];
  REQUIRE(cats.size() == 3);
  CHECK(cats[0]["latest_version"].is_null());

  auto r = call(s, "POST", "/v1/categories/Termination/examples", json{{"text", "The lessee may terminate."}, {"label", true}});
  CHECK(r.status == 201);
  CHECK(json::parse(r.body)["origin"] == "manual-add");
  CHECK(error_code(call(s, "POST", "/v1/categories/Nope/examples", json{{"text", "x"}, {"label", true}})) ==
        "unknown_category");
  CHECK(error_code(call(s, "POST", "/v1/categories/Termination/examples", json{{"text", "x"}})) == "bad_request");

  r = call(s, "POST", "/v1/categories/Termination/retrain");
  REQUIRE(r.status == 200);
  CHECK(json::parse(r.body)["model_version"] == "Termination@v1");
  CHECK(json::parse(call(s, "POST", "/v1/categories/Termination/retrain").body)["version"] == 2);
  CHECK(error_code(call(s, "POST", "/v1/categories/Nope/retrain")) == "unknown_category");

  Service empty(CategoryRegistry({"Termination"}), options());
  r = call(empty, "POST", "/v1/categories/Termination/retrain");
  CHECK(r.status == 422);
  CHECK(error_code(r) == "insufficient_data");

  cats = json::parse(call(s, "GET", "/v1/categories").body)["categories"];
  CHECK(cats[0]["latest_version"] == 2);
  CHECK(cats[2]["degenerate"] == false);
}

TEST_CASE("routing errors") {
  Service s(kCategories, options());
  auto r = call(s, "GET", "/v2/documents");
  CHECK(r.status == 404);
  CHECK(error_code(r) == "not_found");
  // Unmatched method and path pairs are routes that do not exist.
  CHECK(error_code(call(s, "DELETE", "/v1/documents")) == "not_found");
  CHECK(error_code(call(s, "GET", "/v1/findings/x/review")) == "not_found");
}

TEST_CASE("API error codes form a closed set") {
  std::set<std::string> names;
  for (const auto c : kAllApiErrorCodes) {
    names.insert(std::string(to_string(c)));
    const int status = http_status(c);
    CHECK(status >= 400);
    CHECK(status < 600);
  }
  CHECK(names == std::set<std::string>{"bad_request", "empty_document", "bad_threshold", "not_found",
                                       "unknown_category", "no_model", "already_reviewed", "insufficient_data",
                                       "bad_format", "internal"});
  // Every library error maps into the set.
  for (int i = 0; i <= static_cast<int>(ErrorCode::io); ++i)
    CHECK(names.count(std::string(to_string(api_code(static_cast<ErrorCode>(i))))) == 1);
}

TEST_CASE("service state survives a restart") {
  TempDir dir("restart");
  std::string doc_id;
  std::vector<Finding> findings;
  {
    Service s(kCategories, options(dir.path));
    synthetic::TwoTopicOptions o;
    o.paragraphs = 60;
    s.pipeline().seed(ingest_labeled(synthetic::two_topic_corpus(o), kCategories, {}, 5));
    s.retrain("Termination");
    doc_id = s.upload(synthetic::planted_document(5, 2, 1).text, "persisted").doc_id;
    s.analyze(doc_id, {}, 0.0);
    findings = s.findings(doc_id);
    s.review(findings[0].finding_id, "accept", "kept");
    findings = s.findings(doc_id);
  }
  Service again(kCategories, options(dir.path));
  CHECK(again.document(doc_id).title == "persisted");
  CHECK(again.document(doc_id).analyzed);
  CHECK(again.findings(doc_id) == findings);
  CHECK(again.categories()[0].latest_version == 1);
  CHECK(again.upload("new", "").doc_id != doc_id);
}

// Each framework functionality, with the endpoint that provides it.
TEST_CASE("every framework functionality is reachable") {
  Service s(kCategories, options());
  synthetic::TwoTopicOptions o;
  o.paragraphs = 60;
  s.pipeline().seed(ingest_labeled(synthetic::two_topic_corpus(o), kCategories, {}, 5));
  REQUIRE(call(s, "POST", "/v1/categories/Termination/retrain").status == 200);
  const auto planted = synthetic::planted_document(8, 3, 9);

  // 1 document upload
  auto r = call(s, "POST", "/v1/documents", json{{"text", planted.text}, {"title", "Contract"}});
  REQUIRE(r.status == 201);
  const auto id = json::parse(r.body)["doc_id"].get<std::string>();
  // 2 document repository
  CHECK(json::parse(call(s, "GET", "/v1/documents").body)["documents"].size() == 1);
  // 3 selection of risk categories
  const auto cats = json::parse(call(s, "GET", "/v1/categories").body)["categories"];
  CHECK(cats.size() == kCategories.size());
  // 4 extracted paragraphs for the selected category
  r = call(s, "POST", "/v1/documents/" + id + "/analyze", json{{"categories", {"Termination"}}});
  REQUIRE(r.status == 200);
  const auto found = json::parse(r.body)["categories"][0]["findings"];
  CHECK(found.size() == 3);
  // 5 probability values
  for (const auto& f : found) CHECK(f["probability"].get<double>() >= 0.5);
  // 6 reviewing and commenting
  r = call(s, "POST", "/v1/findings/" + found[0]["finding_id"].get<std::string>() + "/review",
           json{{"verdict", "accept"}, {"comment", "agreed"}});
  CHECK(json::parse(r.body)["comment"] == "agreed");
  // 7 feedback to decline
  r = call(s, "POST", "/v1/findings/" + found[1]["finding_id"].get<std::string>() + "/review",
           json{{"verdict", "decline"}});
  CHECK(json::parse(r.body)["status"] == "rejected");
  // 8 original legal document
  CHECK(json::parse(call(s, "GET", "/v1/documents/" + id).body)["text"] == planted.text);
  // 9 export reports
  r = call(s, "GET", "/v1/documents/" + id + "/export");
  CHECK(parse_report(r.body).findings.size() == 3);
}

TEST_CASE("CLI and API produce identical artifacts") {
  TempDir cli_dir("cli"), api_dir("api");
  ::setenv("LEXRISK_SEED", "1", 1);
  const auto doc_file = cli_dir.path.string() + "-doc.txt";
  const auto planted = synthetic::planted_document(12, 4, 17);
  io::write_file(doc_file, planted.text);
  const std::vector<std::string> hyper{"--arch", "dbow", "-k", "5", "--subsample", "0", "--window", "3",
                                       "--dim", "20", "--min-count", "1", "--epochs", "15"};
  const auto state = cli_dir.path.string();

  std::string out;
  REQUIRE(run_cli({"--state", state, "ingest", "--synthetic", "80"}, &out) == 0);
  CHECK(json::parse(out)["paragraphs"] == 80);
  auto train = std::vector<std::string>{"--state", state, "train"};
  train.insert(train.end(), hyper.begin(), hyper.end());
  REQUIRE(run_cli(train) == 0);
  std::string analyzed, exported;
  REQUIRE(run_cli({"--state", state, "analyze", "--file", doc_file, "--title", "Parity", "--threshold", "0.2"},
                  &analyzed) == 0);
  REQUIRE(run_cli({"--state", state, "export", "--doc", "doc-1"}, &exported) == 0);

  // The same steps through the service API.
  const CategoryRegistry cats({"Termination", "Indemnity"});
  PipelineOptions opts;
  opts.config = fast_config();
  opts.state_dir = api_dir.path;
  Service s(cats, opts);
  synthetic::TwoTopicOptions o;
  o.paragraphs = 80;
  s.pipeline().seed(ingest_labeled(synthetic::two_topic_corpus(o), cats, {}, 1));
  s.retrain("Termination");
  s.retrain("Indemnity");
  const auto doc = s.upload(planted.text, "Parity");
  const auto r = call(s, "POST", "/v1/documents/" + doc.doc_id + "/analyze", json{{"threshold", 0.2}});
  REQUIRE(r.status == 200);
  CHECK(r.body + "\n" == analyzed);
  CHECK(s.export_report(doc.doc_id, "tsv") == exported);
  CHECK(!parse_report(exported).findings.empty());
  for (const auto* name : {"Termination", "Indemnity"}) {
    const auto rel = fs::path("models") / name / "v1.model";
    CHECK(io::read_file((cli_dir.path / rel).string()) == io::read_file((api_dir.path / rel).string()));
  }

  // Review and sweep from the CLI.
  const auto first = parse_report(exported).findings.front().finding_id;
  REQUIRE(run_cli({"--state", state, "review", "--finding", first, "--verdict", "reject", "--comment", "no"}, &out) == 0);
  CHECK(json::parse(out)["status"] == "rejected");
  CHECK(run_cli({"--state", state, "review", "--finding", first, "--verdict", "accept"}) == 1);
  std::string sweep_a, sweep_b;
  auto sweep = std::vector<std::string>{"--state", state, "sweep", "--param", "k", "--values", "5,10,15,20",
                                        "--category", "Termination", "--format", "tsv"};
  sweep.insert(sweep.end(), hyper.begin() + 2, hyper.end());  // keep the sweep's own k
  REQUIRE(run_cli(sweep, &sweep_a) == 0);
  REQUIRE(run_cli(sweep, &sweep_b) == 0);
  CHECK(sweep_a == sweep_b);
  CHECK(std::count(sweep_a.begin(), sweep_a.end(), '\n') == 5);
  fs::remove(doc_file);
}

TEST_CASE("CLI usage errors") {
  TempDir dir("usage");
  const auto state = dir.path.string();
  CHECK(run_cli({"--state", state, "frobnicate"}) == 2);
  CHECK(run_cli({"--state", state, "analyze", "--doc", "doc-1"}) == 2);  // no categories yet
  CHECK(run_cli({"--state", state, "ingest", "--synthetic", "20", "--bogus-flag"}) == 2);
  CHECK(run_cli({"--state", state, "ingest", "--synthetic", "20"}) == 0);
  CHECK(run_cli({"--state", state, "train", "--dim", "zero"}) == 1);
  REQUIRE(run_cli({"--state", state, "train", "--arch", "dm", "--objective", "neg", "-k", "10", "--subsample", "1e-6",
                   "--window", "10", "--dim", "100", "--epochs", "2"}) == 0);
  const auto config = json::parse(io::read_file((dir.path / "config.json").string()));
  CHECK(config["arch"] == "dm");
  CHECK(config["objective"] == "neg");
  CHECK(config["k"] == 10);
  CHECK(config["subsample"] == 1e-6);
  CHECK(config["window"] == 10);
  CHECK(config["dim"] == 100);
  CHECK(config["classifier"] == "svm-linear");
  CHECK(run_cli({"--state", state, "export", "--doc", "doc-9"}) == 1);
  CHECK(run_cli({"--state", state, "retrain", "--category", "Nope"}) == 1);
}
