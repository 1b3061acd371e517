#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "lexrisk/binary_io.hpp"
#include "lexrisk/error.hpp"
#include "lexrisk/server.hpp"
#include "lexrisk/synthetic.hpp"

namespace lexrisk::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

// Hyperparameter flags shared by train and sweep, applied by name so the
// parsing rules are the sweep's.
struct ParamFlags {
  std::vector<std::pair<std::string, std::optional<std::string>>> values{
      {"arch", {}},   {"objective", {}}, {"k", {}},         {"subsample", {}}, {"window", {}},
      {"dim", {}},    {"combine", {}},   {"min_count", {}}, {"epochs", {}},    {"lr", {}},
      {"seed", {}},   {"classifier", {}}, {"c", {}},        {"gamma", {}}};

  void attach(CLI::App* cmd) {
    for (auto& [name, value] : values) {
      std::string flag = name == "k" ? "-k,--negative" : name == "c" ? "-c,--c-value" : "--" + name;
      if (name == "min_count") flag = "--min-count";
      if (name == "objective") flag = "--objective,--method";
      cmd->add_option(flag, value, "override " + name);
    }
  }

  void apply(EndToEndConfig& config) const {
    for (const auto& [name, value] : values)
      if (value) apply_parameter(config, name, *value);
  }
};

json config_to_json(const EndToEndConfig& c) {
  const auto& h = c.embedding;
  json j{{"arch", to_string(h.architecture)},
         {"objective", to_string(h.objective)},
         {"k", h.negative},
         {"subsample", h.subsample},
         {"window", h.window},
         {"dim", h.dim},
         {"min_count", h.min_count},
         {"combine", to_string(h.combine)},
         {"epochs", h.epochs},
         {"lr_start", h.lr_start},
         {"lr_end", h.lr_end},
         {"seed", h.seed},
         {"noise_exponent", h.noise_exponent},
         {"lowercase", h.lowercase},
         {"classifier", to_string(c.classifier)},
         {"c", c.classifier_params.c},
         {"threshold", c.classifier_params.threshold}};
  if (c.classifier_params.gamma) j["gamma"] = *c.classifier_params.gamma;
  return j;
}

EndToEndConfig config_from_json(const json& j) {
  EndToEndConfig c;
  auto& h = c.embedding;
  h.architecture = architecture_from_string(j.at("arch").get<std::string>());
  h.objective = objective_from_string(j.at("objective").get<std::string>());
  h.negative = j.at("k").get<std::uint32_t>();
  h.subsample = j.at("subsample").get<double>();
  h.window = j.at("window").get<std::uint32_t>();
  h.dim = j.at("dim").get<std::uint32_t>();
  h.min_count = j.at("min_count").get<std::uint64_t>();
  h.combine = combine_from_string(j.at("combine").get<std::string>());
  h.epochs = j.at("epochs").get<std::uint32_t>();
  h.lr_start = j.at("lr_start").get<double>();
  h.lr_end = j.at("lr_end").get<double>();
  h.seed = j.at("seed").get<std::uint64_t>();
  h.noise_exponent = j.at("noise_exponent").get<double>();
  h.lowercase = j.at("lowercase").get<bool>();
  c.classifier = classifier_kind_from_string(j.at("classifier").get<std::string>());
  c.classifier_params.c = j.at("c").get<double>();
  c.classifier_params.threshold = j.at("threshold").get<double>();
  c.classifier_params.seed = h.seed;
  if (j.contains("gamma")) c.classifier_params.gamma = j["gamma"].get<double>();
  return c;
}

class State {
 public:
  explicit State(fs::path dir) : dir_(std::move(dir)) {}

  const fs::path& dir() const { return dir_; }
  fs::path categories_file() const { return dir_ / "categories.txt"; }
  fs::path config_file() const { return dir_ / "config.json"; }

  std::optional<CategoryRegistry> categories() const {
    std::ifstream in(categories_file());
    if (!in) return std::nullopt;
    return CategoryRegistry::parse(in);
  }

  void save_categories(const CategoryRegistry& r) const {
    std::string text;
    for (const auto& n : r.names()) text += n + "\n";
    fs::create_directories(dir_);
    io::write_file(categories_file().string(), text);
  }

  EndToEndConfig config() const {
    if (!fs::exists(config_file())) {
      EndToEndConfig c;
      c.embedding.seed = std::stoull(env_or("LEXRISK_SEED", "1"));
      c.classifier_params.seed = c.embedding.seed;
      return c;
    }
    try {
      return config_from_json(json::parse(io::read_file(config_file().string())));
    } catch (const json::exception& e) {
      fail(ErrorCode::bad_format, config_file().string() + ": " + e.what());
    }
  }

  void save_config(const EndToEndConfig& c) const {
    fs::create_directories(dir_);
    io::write_file(config_file().string(), config_to_json(c).dump(2) + "\n");
  }

  Service service() const {
    auto cats = categories();
    if (!cats) throw Usage("no categories in " + dir_.string() + "; run ingest first");
    PipelineOptions opts;
    opts.config = config();
    opts.state_dir = dir_;
    return Service(std::move(*cats), std::move(opts));
  }

 private:
  fs::path dir_;
};

std::string join_path(std::initializer_list<std::string_view> parts) {
  std::string out;
  for (auto p : parts) {
    out += '/';
    out += p;
  }
  return out;
}

// Sends one request through the same router the HTTP server uses.
std::string call(Service& service, std::string method, std::string path, const json& body = nullptr,
                 std::map<std::string, std::string> query = {}) {
  const auto res = service.handle({std::move(method), std::move(path), std::move(query), body.is_null() ? "" : body.dump()});
  if (res.status >= 400) {
    const auto j = json::parse(res.body, nullptr, false);
    std::string code = "error", message = res.body;
    if (!j.is_discarded() && j.contains("error")) {
      code = j["error"].value("code", code);
      message = j["error"].value("message", message);
    }
    throw ApiError(ApiErrorCode::internal, code + ": " + message, res.body);
  }
  return res.body;
}

void emit(std::ostream& out, const std::string& body, const std::string& path) {
  if (path.empty() || path == "-") {
    out << body;
    if (!body.empty() && body.back() != '\n') out << '\n';
  } else {
    io::write_file(path, body);
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

bool parse_label(const std::string& s) {
  if (s == "1" || s == "true" || s == "positive" || s == "yes") return true;
  if (s == "0" || s == "false" || s == "negative" || s == "no") return false;
  throw Usage("label must be true or false, got: " + s);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Paragraph-vector risk extraction for legal text"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string state_dir = env_or("LEXRISK_STATE", "lexrisk-state");
  app.add_option("--state", state_dir, "state directory (env LEXRISK_STATE)");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "load labeled paragraphs into the training store");
  std::string corpus_path, categories_path, ratios = "0.8,0.1,0.1";
  std::size_t synthetic_n = 0;
  std::uint64_t split_seed = std::stoull(env_or("LEXRISK_SEED", "1"));
  auto* corpus_opt = ingest->add_option("--corpus", corpus_path, "JSONL corpus (doc_id, paragraph_id, text, categories)");
  ingest->add_option("--synthetic", synthetic_n, "generate a two-topic corpus of N paragraphs instead")
      ->excludes(corpus_opt);
  ingest->add_option("--categories", categories_path, "category list, one per line");
  ingest->add_option("--seed", split_seed, "split seed");
  ingest->add_option("--ratios", ratios, "train,validation,test fractions");

  // train
  auto* train_cmd = app.add_subcommand("train", "set hyperparameters and train category models");
  ParamFlags train_flags;
  train_flags.attach(train_cmd);
  std::vector<std::string> train_categories;
  train_cmd->add_option("--category", train_categories, "categories to train (default: all)");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "evaluate a hyperparameter grid end to end");
  ParamFlags sweep_flags;
  sweep_flags.attach(sweep_cmd);
  std::vector<std::string> sweep_params, sweep_values;
  std::string sweep_category, sweep_split = "validation", sweep_format = "text", sweep_out;
  sweep_cmd->add_option("--param", sweep_params, "parameter name per axis")->required();
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values per axis")->required();
  sweep_cmd->add_option("--category", sweep_category, "category to evaluate (default: first)");
  sweep_cmd->add_option("--split", sweep_split, "validation or test");
  sweep_cmd->add_option("--format", sweep_format, "text or tsv");
  sweep_cmd->add_option("--out", sweep_out, "write the report here");

  // upload / documents
  auto* upload_cmd = app.add_subcommand("upload", "add a document to the repository");
  std::string upload_file, upload_title;
  std::optional<std::string> delimiter;
  upload_cmd->add_option("--file", upload_file, "plain-text document")->required();
  upload_cmd->add_option("--title", upload_title);
  upload_cmd->add_option("--delimiter", delimiter, "paragraph delimiter (default: blank lines)");
  auto* documents_cmd = app.add_subcommand("documents", "list the document repository");

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "score a document's paragraphs per category");
  std::string analyze_doc, analyze_file, analyze_title;
  std::vector<std::string> analyze_categories;
  std::optional<double> threshold;
  auto* doc_opt = analyze_cmd->add_option("--doc", analyze_doc, "stored document id");
  analyze_cmd->add_option("--file", analyze_file, "upload this file first")->excludes(doc_opt);
  analyze_cmd->add_option("--title", analyze_title);
  analyze_cmd->add_option("--delimiter", delimiter);
  analyze_cmd->add_option("--category", analyze_categories, "categories (default: all with models)");
  analyze_cmd->add_option("--threshold", threshold, "flagging cutoff in [0, 1] (default 0.5)");

  // findings / review
  auto* findings_cmd = app.add_subcommand("findings", "list a document's findings");
  std::string findings_doc;
  findings_cmd->add_option("--doc", findings_doc)->required();
  auto* review_cmd = app.add_subcommand("review", "accept or reject a finding");
  std::string review_id, verdict, comment;
  review_cmd->add_option("--finding", review_id)->required();
  review_cmd->add_option("--verdict", verdict, "accept, reject or decline")->required();
  review_cmd->add_option("--comment", comment);

  // retrain / examples / categories
  auto* retrain_cmd = app.add_subcommand("retrain", "retrain one category from the store");
  std::string retrain_category;
  retrain_cmd->add_option("--category", retrain_category)->required();
  auto* example_cmd = app.add_subcommand("add-example", "append a manually labeled paragraph");
  std::string example_category, example_text, example_label;
  example_cmd->add_option("--category", example_category)->required();
  example_cmd->add_option("--text", example_text)->required();
  example_cmd->add_option("--label", example_label, "true or false")->required();
  auto* categories_cmd = app.add_subcommand("categories", "list categories with model versions");

  // export
  auto* export_cmd = app.add_subcommand("export", "export a document's findings report");
  std::string export_doc, export_format = "tsv", export_out;
  export_cmd->add_option("--doc", export_doc)->required();
  export_cmd->add_option("--format", export_format, "tsv or text");
  export_cmd->add_option("--out", export_out);

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "serve the /v1 HTTP API");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve_cmd->add_option("--host", host);
  serve_cmd->add_option("--port", port);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    const State state{fs::path(state_dir)};

    if (*ingest) {
      std::vector<Paragraph> paragraphs;
      if (synthetic_n > 0) {
        synthetic::TwoTopicOptions o;
        o.paragraphs = synthetic_n;
        paragraphs = synthetic::two_topic_corpus(o);
      } else if (!corpus_path.empty()) {
        std::ifstream in(corpus_path, std::ios::binary);
        if (!in) fail(ErrorCode::io, "cannot open " + corpus_path);
        paragraphs = read_corpus_jsonl(in);
      } else {
        throw Usage("ingest needs --corpus or --synthetic");
      }
      CategoryRegistry registry;
      if (!categories_path.empty()) {
        std::ifstream in(categories_path);
        if (!in) fail(ErrorCode::io, "cannot open " + categories_path);
        registry = CategoryRegistry::parse(in);
      } else {
        std::vector<std::string> names;
        for (const auto& p : paragraphs)
          for (const auto& c : p.categories)
            if (std::find(names.begin(), names.end(), c) == names.end()) names.push_back(c);
        registry = CategoryRegistry(names);
      }
      if (const auto existing = state.categories(); existing && existing->names() != registry.names())
        throw Usage("state directory already holds different categories");
      const auto r = split_list(ratios);
      if (r.size() != 3) throw Usage("--ratios needs three comma-separated fractions");
      const SplitRatios split_ratios{std::stod(r[0]), std::stod(r[1]), std::stod(r[2])};
      const auto split = ingest_labeled(std::move(paragraphs), registry, split_ratios, split_seed);
      state.save_categories(registry);
      auto service = state.service();
      const auto added = service.pipeline().seed(split);
      emit(out,
           json{{"paragraphs", split.paragraphs.size()},
                {"records", added},
                {"train", split.paragraphs_in(SplitPart::train).size()},
                {"validation", split.paragraphs_in(SplitPart::validation).size()},
                {"test", split.paragraphs_in(SplitPart::test).size()},
                {"categories", registry.names()}}
               .dump(),
           "");
      return 0;
    }

    if (*train_cmd) {
      auto config = state.config();
      train_flags.apply(config);
      config.embedding.validate();
      state.save_config(config);
      auto service = state.service();
      if (train_categories.empty()) train_categories = service.pipeline().categories().names();
      for (const auto& c : train_categories) emit(out, call(service, "POST", join_path({"v1", "categories", c, "retrain"})), "");
      return 0;
    }

    if (*sweep_cmd) {
      if (sweep_params.size() != sweep_values.size()) throw Usage("give one --values list per --param");
      auto config = state.config();
      sweep_flags.apply(config);
      auto service = state.service();
      const auto& names = service.pipeline().categories().names();
      if (sweep_category.empty()) sweep_category = names.front();
      if (!service.pipeline().categories().contains(sweep_category))
        fail(ErrorCode::unknown_category, "unknown category " + sweep_category);
      CategoryData data;
      data.category = sweep_category;
      const auto& store = service.pipeline().store();
      data.train = store.examples(sweep_category, SplitPart::train);
      data.validation = store.examples(sweep_category, SplitPart::validation);
      data.test = store.examples(sweep_category, SplitPart::test);
      std::vector<SweepAxis> grid;
      for (std::size_t i = 0; i < sweep_params.size(); ++i) grid.push_back({sweep_params[i], split_list(sweep_values[i])});
      SweepOptions opts;
      opts.split = split_part_from_string(sweep_split);
      const auto report = sweep(grid, data, config, opts);
      if (sweep_format != "text" && sweep_format != "tsv") throw Usage("--format must be text or tsv");
      emit(out, sweep_format == "tsv" ? report.to_tsv() : report.to_text(), sweep_out);
      return 0;
    }

    auto service = state.service();
    if (*upload_cmd) {
      emit(out, call(service, "POST", "/v1/documents",
                     json{{"text", io::read_file(upload_file)}, {"title", upload_title}, {"delimiter", delimiter ? json(*delimiter) : json(nullptr)}}),
           "");
    } else if (*documents_cmd) {
      emit(out, call(service, "GET", "/v1/documents"), "");
    } else if (*analyze_cmd) {
      if (!analyze_file.empty()) {
        const auto up = json::parse(call(service, "POST", "/v1/documents",
                                         json{{"text", io::read_file(analyze_file)},
                                              {"title", analyze_title},
                                              {"delimiter", delimiter ? json(*delimiter) : json(nullptr)}}));
        analyze_doc = up.at("doc_id").get<std::string>();
      }
      if (analyze_doc.empty()) throw Usage("analyze needs --doc or --file");
      json body{{"categories", analyze_categories}};
      if (threshold) body["threshold"] = *threshold;
      emit(out, call(service, "POST", join_path({"v1", "documents", analyze_doc, "analyze"}), body), "");
    } else if (*findings_cmd) {
      emit(out, call(service, "GET", join_path({"v1", "documents", findings_doc, "findings"})), "");
    } else if (*review_cmd) {
      emit(out, call(service, "POST", join_path({"v1", "findings", review_id, "review"}),
                     json{{"verdict", verdict}, {"comment", comment}}),
           "");
    } else if (*retrain_cmd) {
      emit(out, call(service, "POST", join_path({"v1", "categories", retrain_category, "retrain"})), "");
    } else if (*example_cmd) {
      emit(out, call(service, "POST", join_path({"v1", "categories", example_category, "examples"}),
                     json{{"text", example_text}, {"label", parse_label(example_label)}}),
           "");
    } else if (*categories_cmd) {
      emit(out, call(service, "GET", "/v1/categories"), "");
    } else if (*export_cmd) {
      const auto body = call(service, "GET", join_path({"v1", "documents", export_doc, "export"}), nullptr,
                             {{"format", export_format}});
      if (export_out.empty())
        out << body;
      else
        io::write_file(export_out, body);
    } else if (*serve_cmd) {
      err << "serving /v1 on http://" << host << ":" << port << "\n";
      run_http_server(service, host, port);
    }
    return 0;
  } catch (const Usage& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ApiError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lexrisk::cli
