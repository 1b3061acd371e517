#include "lexrisk/binary_io.hpp"
#include "lexrisk/classify.hpp"
#include "lexrisk/error.hpp"

namespace lexrisk {

namespace {

constexpr std::string_view kMagic = "LXRCLASS";

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void write_pair(io::BinaryWriter& w, const std::array<std::vector<double>, 2>& v) {
  w.f64s(v[0]);
  w.f64s(v[1]);
}

std::array<std::vector<double>, 2> read_pair(io::BinaryReader& r, std::size_t dim) {
  std::array<std::vector<double>, 2> v{r.f64s(), r.f64s()};
  if (v[0].size() != dim || v[1].size() != dim) fail(ErrorCode::bad_format, "parameter block has wrong dimension");
  return v;
}

}  // namespace

std::string serialize_classifier(const CategoryClassifier& c) {
  io::BinaryWriter w;
  w.bytes(kMagic);
  w.u32(kClassifierFormatVersion);
  w.u8(static_cast<std::uint8_t>(c.kind()));
  w.str(c.category());
  w.u64(c.dim());
  w.f64(c.threshold());
  w.f64(c.c());
  w.f64(c.calibrator().slope);
  w.f64(c.calibrator().intercept);
  const auto constant = c.constant_label();
  w.u8(constant ? (*constant ? 2 : 1) : 0);
  if (constant) return std::move(w).data();

  std::visit(overloaded{
                 [&](const LinearSvm& m) {
                   w.f64s(m.weights);
                   w.f64(m.bias);
                 },
                 [&](const RbfSvm& m) {
                   w.f64(m.gamma);
                   w.f64(m.bias);
                   w.f64s(m.coefficients);
                   for (const auto& s : m.support) w.f64s(s);
                 },
                 [&](const GaussianNb& m) {
                   w.f64(m.priors[0]);
                   w.f64(m.priors[1]);
                   write_pair(w, m.means);
                   write_pair(w, m.variances);
                 },
                 [&](const BernoulliNb& m) {
                   w.f64(m.priors[0]);
                   w.f64(m.priors[1]);
                   write_pair(w, m.rates);
                 },
             },
             c.params());
  return std::move(w).data();
}

CategoryClassifier deserialize_classifier(std::string_view bytes) {
  io::BinaryReader r(bytes);
  r.expect_magic(kMagic);
  if (const auto v = r.u32(); v != kClassifierFormatVersion)
    fail(ErrorCode::bad_format, "unsupported classifier format version " + std::to_string(v));
  const auto kind_byte = r.u8();
  if (kind_byte > 3) fail(ErrorCode::bad_format, "unknown classifier kind byte");
  const auto kind = static_cast<ClassifierKind>(kind_byte);
  auto category = r.str();
  const auto dim = static_cast<std::size_t>(r.u64());
  const double threshold = r.f64();
  const double c = r.f64();
  Calibrator cal{r.f64(), r.f64()};
  const auto constant = r.u8();
  if (constant > 2) fail(ErrorCode::bad_format, "bad degenerate flag");

  auto finish = [&](CategoryClassifier out) {
    if (!r.done()) fail(ErrorCode::bad_format, "trailing bytes after classifier");
    return out;
  };
  try {
    if (constant != 0)
      return finish(CategoryClassifier::degenerate(std::move(category), kind, dim, constant == 2, threshold, c));

    CategoryClassifier::Params params;
    switch (kind) {
      case ClassifierKind::svm_linear: {
        LinearSvm m;
        m.weights = r.f64s();
        m.bias = r.f64();
        if (m.weights.size() != dim) fail(ErrorCode::bad_format, "weight vector has wrong dimension");
        params = std::move(m);
        break;
      }
      case ClassifierKind::svm_rbf: {
        RbfSvm m;
        m.gamma = r.f64();
        m.bias = r.f64();
        m.coefficients = r.f64s();
        for (std::size_t i = 0; i < m.coefficients.size(); ++i) {
          m.support.push_back(r.f64s());
          if (m.support.back().size() != dim) fail(ErrorCode::bad_format, "support vector has wrong dimension");
        }
        params = std::move(m);
        break;
      }
      case ClassifierKind::nb_gaussian: {
        GaussianNb m;
        m.priors = {r.f64(), r.f64()};
        m.means = read_pair(r, dim);
        m.variances = read_pair(r, dim);
        params = std::move(m);
        break;
      }
      case ClassifierKind::nb_bernoulli: {
        BernoulliNb m;
        m.priors = {r.f64(), r.f64()};
        m.rates = read_pair(r, dim);
        params = std::move(m);
        break;
      }
    }
    return finish(CategoryClassifier(std::move(category), kind, dim, std::move(params), cal, threshold, c));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::invalid_argument) fail(ErrorCode::bad_format, e.what());
    throw;
  }
}

}  // namespace lexrisk
