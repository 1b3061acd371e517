#include <string>

#include "lexrisk/binary_io.hpp"
#include "lexrisk/embedding.hpp"
#include "lexrisk/error.hpp"

namespace lexrisk {
namespace {

constexpr std::string_view kMagic = "LXRMODEL";

void write_matrix(io::BinaryWriter& w, const Matrix& m) {
  w.u64(m.rows());
  w.u64(m.cols());
  for (float x : m.values()) w.f32(x);
}

Matrix read_matrix(io::BinaryReader& r, std::size_t rows, std::size_t cols, const char* name) {
  const auto got_rows = r.u64();
  const auto got_cols = r.u64();
  if (got_rows != rows || got_cols != cols)
    fail(ErrorCode::bad_format, std::string("matrix ") + name + " has unexpected shape");
  Matrix m(rows, cols);
  for (auto& x : m.values()) x = r.f32();
  return m;
}

}  // namespace

std::string serialize_model(const EmbeddingModel& model) {
  io::BinaryWriter w;
  w.bytes(kMagic);
  w.u32(kModelFormatVersion);

  const auto& hp = model.hyperparams();
  w.u8(static_cast<std::uint8_t>(hp.architecture));
  w.u8(static_cast<std::uint8_t>(hp.objective));
  w.u8(static_cast<std::uint8_t>(hp.combine));
  w.u8(hp.lowercase ? 1 : 0);
  w.u32(hp.negative);
  w.f64(hp.subsample);
  w.u32(hp.window);
  w.u32(hp.dim);
  w.u64(hp.min_count);
  w.u32(hp.epochs);
  w.f64(hp.lr_start);
  w.f64(hp.lr_end);
  w.u64(hp.seed);
  w.f64(hp.noise_exponent);

  const auto& vocab = model.vocab();
  w.u64(vocab.total_tokens());
  w.u64(vocab.min_count());
  w.u64(vocab.size());
  for (TokenId i = 0; i < vocab.size(); ++i) {
    w.str(vocab.token(i));
    w.u64(vocab.count(i));
  }

  w.u64(model.doc_ids().size());
  for (const auto& id : model.doc_ids()) w.str(id);

  write_matrix(w, model.words());
  write_matrix(w, model.output());
  write_matrix(w, model.docs());
  return std::move(w).data();
}

EmbeddingModel deserialize_model(std::string_view bytes) {
  io::BinaryReader r(bytes);
  r.expect_magic(kMagic);
  const auto version = r.u32();
  if (version != kModelFormatVersion)
    fail(ErrorCode::bad_format, "unsupported model format version " + std::to_string(version));

  Hyperparams hp;
  const auto arch = r.u8();
  const auto objective = r.u8();
  const auto combine = r.u8();
  if (arch > 1 || objective > 1 || combine > 1) fail(ErrorCode::bad_format, "bad enum in model header");
  hp.architecture = static_cast<Architecture>(arch);
  hp.objective = static_cast<Objective>(objective);
  hp.combine = static_cast<Combine>(combine);
  hp.lowercase = r.u8() != 0;
  hp.negative = r.u32();
  hp.subsample = r.f64();
  hp.window = r.u32();
  hp.dim = r.u32();
  hp.min_count = r.u64();
  hp.epochs = r.u32();
  hp.lr_start = r.f64();
  hp.lr_end = r.f64();
  hp.seed = r.u64();
  hp.noise_exponent = r.f64();
  try {
    hp.validate();
  } catch (const Error& e) {
    fail(ErrorCode::bad_format, std::string("invalid hyperparameters in model: ") + e.what());
  }

  const auto total = r.u64();
  const auto vocab_min_count = r.u64();
  const auto n = r.length(16);
  std::vector<std::pair<std::string, std::uint64_t>> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto token = r.str();
    entries.emplace_back(std::move(token), r.u64());
  }

  EmbeddingModel m;
  m.hyperparams_ = hp;
  m.vocab_ = Vocabulary::from_entries(entries, total, vocab_min_count);
  if (m.vocab_.tokens().size() != n) fail(ErrorCode::bad_format, "vocabulary size mismatch");
  for (TokenId i = 0; i < n; ++i)
    if (m.vocab_.token(i) != entries[i].first) fail(ErrorCode::bad_format, "vocabulary not in canonical order");
  if (m.vocab_.empty()) fail(ErrorCode::bad_format, "model has an empty vocabulary");
  m.derive_tables();

  const auto docs = r.length(8);
  m.doc_ids_.reserve(docs);
  for (std::size_t i = 0; i < docs; ++i) m.doc_ids_.push_back(r.str());

  const std::size_t v = m.vocab_.size();
  const std::size_t out_rows = hp.objective == Objective::neg ? v : m.huffman_->internal_nodes;
  m.words_ = read_matrix(r, v + 1, hp.dim, "W");
  m.output_ = read_matrix(r, out_rows, hp.hidden_width(), "O");
  m.docs_ = read_matrix(r, docs, hp.dim, "D");
  if (!r.done()) fail(ErrorCode::bad_format, "trailing bytes after model payload");
  return m;
}

void save_model(const EmbeddingModel& model, const std::string& path) {
  io::write_file(path, serialize_model(model));
}

EmbeddingModel load_model(const std::string& path) { return deserialize_model(io::read_file(path)); }

}  // namespace lexrisk
