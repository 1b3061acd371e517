#include <fmt/format.h>

#include <charconv>
#include <cmath>

#include "lexrisk/error.hpp"
#include "lexrisk/eval.hpp"

namespace lexrisk {

namespace {

template <typename T>
T parse_number(std::string_view name, std::string_view text) {
  T value{};
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size())
    fail(ErrorCode::invalid_argument, fmt::format("bad value '{}' for parameter {}", text, name));
  return value;
}

std::string cell(const std::optional<double>& v, bool precise) {
  if (!v) return "-";
  return precise ? fmt::format("{}", *v) : fmt::format("{:.4f}", *v);
}

std::vector<std::string> metric_cells(const SweepRow& row, bool precise) {
  return {cell(row.auc, precise), cell(row.metrics.accuracy, precise), cell(row.metrics.precision, precise),
          cell(row.metrics.recall, precise), cell(row.metrics.f1, precise)};
}

}  // namespace

void apply_parameter(EndToEndConfig& config, std::string_view name, std::string_view value) {
  auto& hp = config.embedding;
  if (name == "k" || name == "K" || name == "negative") {
    hp.negative = parse_number<std::uint32_t>(name, value);
  } else if (name == "subsample" || name == "t" || name == "T") {
    hp.subsample = parse_number<double>(name, value);
  } else if (name == "window") {
    hp.window = parse_number<std::uint32_t>(name, value);
  } else if (name == "dim" || name == "vector_size") {
    hp.dim = parse_number<std::uint32_t>(name, value);
  } else if (name == "arch" || name == "architecture") {
    hp.architecture = architecture_from_string(value);
  } else if (name == "objective" || name == "method") {
    hp.objective = objective_from_string(value);
  } else if (name == "combine") {
    hp.combine = combine_from_string(value);
  } else if (name == "min_count") {
    hp.min_count = parse_number<std::uint64_t>(name, value);
  } else if (name == "epochs") {
    hp.epochs = parse_number<std::uint32_t>(name, value);
  } else if (name == "lr") {
    hp.lr_start = parse_number<double>(name, value);
  } else if (name == "seed") {
    hp.seed = parse_number<std::uint64_t>(name, value);
    config.classifier_params.seed = hp.seed;
  } else if (name == "c" || name == "C") {
    config.classifier_params.c = parse_number<double>(name, value);
  } else if (name == "classifier") {
    config.classifier = classifier_kind_from_string(value);
  } else if (name == "gamma") {
    config.classifier_params.gamma = parse_number<double>(name, value);
  } else {
    fail(ErrorCode::invalid_argument, fmt::format("unknown sweep parameter '{}'", name));
  }
}

SweepReport sweep(const std::vector<SweepAxis>& grid, const DatasetSplit& dataset, std::string_view category,
                  const EndToEndConfig& base, const SweepOptions& options) {
  return sweep(grid, category_data(dataset, category), base, options);
}

SweepReport sweep(const std::vector<SweepAxis>& grid, const CategoryData& data, const EndToEndConfig& base,
                  const SweepOptions& options) {
  require(!grid.empty(), "sweep grid is empty");
  for (const auto& axis : grid) {
    require(!axis.values.empty(), "sweep axis '" + axis.name + "' has no values");
    for (const auto& v : axis.values) {
      EndToEndConfig probe = base;
      apply_parameter(probe, axis.name, v);
      probe.embedding.validate();
    }
  }
  require(!data.train.empty(), "no training examples for " + data.category);

  SweepReport report;
  report.category = data.category;
  report.split = options.split;
  for (const auto& axis : grid) report.parameters.push_back(axis.name);

  std::vector<std::size_t> index(grid.size(), 0);
  while (true) {
    EndToEndConfig config = base;
    SweepRow row;
    for (std::size_t a = 0; a < grid.size(); ++a) {
      apply_parameter(config, grid[a].name, grid[a].values[index[a]]);
      row.assignment.push_back(grid[a].values[index[a]]);
    }
    const auto model = train_end_to_end(data.category, data.train, data.validation, config);
    const auto ev = evaluate(model, data.part(options.split), options.threshold);
    row.auc = ev.auc;
    row.metrics = ev.metrics;
    row.confusion = ev.confusion;
    row.skipped = ev.skipped;
    report.rows.push_back(std::move(row));

    std::size_t a = grid.size();
    while (a > 0) {
      --a;
      if (++index[a] < grid[a].values.size()) break;
      index[a] = 0;
      if (a == 0) return report;
    }
  }
}

std::string SweepReport::to_text() const {
  std::vector<std::string> header = parameters;
  for (const char* h : {"AUC", "Accuracy", "Precision", "Recall", "F1"}) header.emplace_back(h);
  std::vector<std::vector<std::string>> table{header};
  for (const auto& row : rows) {
    auto cells = row.assignment;
    for (auto& c : metric_cells(row, false)) cells.push_back(std::move(c));
    table.push_back(std::move(cells));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : table)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());

  std::string out = fmt::format("{} ({} split)\n", category, to_string(split));
  for (std::size_t r = 0; r < table.size(); ++r) {
    std::string line;
    for (std::size_t i = 0; i < table[r].size(); ++i) {
      if (i > 0) line += "  ";
      line += i < parameters.size() ? fmt::format("{:<{}}", table[r][i], width[i])
                                    : fmt::format("{:>{}}", table[r][i], width[i]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
    }
  }
  return out;
}

std::string SweepReport::to_tsv() const {
  std::string out;
  for (const auto& p : parameters) out += p + '\t';
  out += "auc\taccuracy\tprecision\trecall\tf1\ttp\tfp\tfn\ttn\tskipped\n";
  for (const auto& row : rows) {
    for (const auto& v : row.assignment) out += v + '\t';
    for (const auto& c : metric_cells(row, true)) out += c + '\t';
    out += fmt::format("{}\t{}\t{}\t{}\t{}\n", row.confusion.tp, row.confusion.fp, row.confusion.fn,
                       row.confusion.tn, row.skipped);
  }
  return out;
}

}  // namespace lexrisk
