#include "secretsieve/learned.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <boost/math/distributions/fisher_f.hpp>
#include <nlohmann/json.hpp>

namespace secretsieve {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view name, const E (&all)[N], const char* what) {
  for (E e : all) {
    if (to_string(e) == name) return e;
  }
  throw std::invalid_argument(std::string("unknown ") + what + ": " + std::string(name));
}

constexpr Variant kVariants[] = {Variant::kCaseSensitive, Variant::kCaseInsensitive,
                                 Variant::kEnglishWords};
constexpr Scheme kSchemes[] = {Scheme::kCharHistogram, Scheme::kTfIdf, Scheme::kCountFrequency,
                               Scheme::kCharNgram};
constexpr ModelKind kKinds[] = {ModelKind::kLogisticRegression, ModelKind::kNaiveBayes,
                                ModelKind::kLinearSvc};

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_token_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

const Dictionary& require(const Dictionary* d) {
  if (d == nullptr) {
    throw std::invalid_argument("english_word_extraction needs a dictionary");
  }
  return *d;
}

constexpr std::size_t kMinEnglishWord = 3;

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::kCaseSensitive: return "case_sensitive";
    case Variant::kCaseInsensitive: return "case_insensitive";
    case Variant::kEnglishWords: return "english_word_extraction";
  }
  return "unknown";
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::kCharHistogram: return "char_histogram";
    case Scheme::kTfIdf: return "tfidf";
    case Scheme::kCountFrequency: return "count_frequency";
    case Scheme::kCharNgram: return "char_ngram";
  }
  return "unknown";
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kLogisticRegression: return "logistic_regression";
    case ModelKind::kNaiveBayes: return "naive_bayes";
    case ModelKind::kLinearSvc: return "linear_svc";
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) { return parse_enum(name, kVariants, "variant"); }
Scheme parse_scheme(std::string_view name) { return parse_enum(name, kSchemes, "scheme"); }
ModelKind parse_model_kind(std::string_view name) {
  return parse_enum(name, kKinds, "model kind");
}

std::vector<std::string> english_words(std::string_view s, const Dictionary& dictionary) {
  std::vector<std::string> out;
  std::string run;
  auto flush = [&] {
    if (run.size() >= kMinEnglishWord) {
      auto lower = ascii_lower(run);
      if (dictionary.contains(lower)) out.push_back(std::move(lower));
    }
    run.clear();
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (!std::isalpha(c)) {
      flush();
      continue;
    }
    // camelCase boundary: lower followed by upper.
    if (!run.empty() && std::isupper(c) &&
        std::islower(static_cast<unsigned char>(run.back()))) {
      flush();
    }
    run.push_back(static_cast<char>(c));
  }
  flush();
  return out;
}

std::vector<std::string> apply_variant(std::span<const std::string> strings, Variant variant,
                                       const Dictionary* dictionary) {
  std::vector<std::string> out;
  out.reserve(strings.size());
  for (const auto& s : strings) {
    switch (variant) {
      case Variant::kCaseSensitive: out.push_back(s); break;
      case Variant::kCaseInsensitive: out.push_back(ascii_lower(s)); break;
      case Variant::kEnglishWords: {
        std::string joined;
        for (const auto& w : english_words(s, require(dictionary))) joined += w;
        out.push_back(std::move(joined));
        break;
      }
    }
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_token_char(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_token_char(s[j])) ++j;
    if (j - i >= 2) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

FeatureVector char_vector(std::span<const std::string> strings, Variant variant,
                          const Dictionary* dictionary) {
  if (strings.empty()) throw EmptyGroup("char_vector of an empty group");
  FeatureVector fv;
  fv.scheme = Scheme::kCharHistogram;
  fv.variant = variant;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(256);
  for (const auto& s : apply_variant(strings, variant, dictionary)) {
    for (const char c : s) counts[static_cast<unsigned char>(c)] += 1.0;
  }
  fv.values = counts.sparseView();
  return fv;
}

double cosine_similarity(const FeatureVector& x, const FeatureVector& y) {
  if (x.scheme != y.scheme || x.variant != y.variant) {
    throw SchemeMismatch("cosine similarity needs vectors of the same scheme and variant");
  }
  if (x.values.size() != y.values.size()) {
    throw SchemeMismatch("cosine similarity needs vectors of the same dimension");
  }
  const double nx = x.values.norm();
  const double ny = y.values.norm();
  if (nx == 0.0 || ny == 0.0) throw ZeroVector("cosine similarity of a zero vector");
  const double c = x.values.dot(y.values) / (nx * ny);
  return std::clamp(c, -1.0, 1.0);
}

double tf(std::string_view term, std::span<const std::string> terms) {
  return static_cast<double>(std::count(terms.begin(), terms.end(), term));
}

double idf(std::string_view term, std::span<const std::vector<std::string>> documents) {
  if (documents.empty()) throw std::invalid_argument("idf over an empty dataset");
  std::size_t df = 0;
  for (const auto& doc : documents) {
    if (std::find(doc.begin(), doc.end(), term) != doc.end()) ++df;
  }
  if (df == 0) return 0.0;  // unseen term carries no weight
  return std::log10(static_cast<double>(documents.size()) / static_cast<double>(df));
}

// ---------------------------------------------------------------------------
// Vectorizer

Vectorizer::Vectorizer(Scheme scheme, Variant variant, std::size_t ngram_max)
    : scheme_(scheme), variant_(variant), ngram_max_(std::max<std::size_t>(ngram_max, 1)) {}

std::size_t Vectorizer::dimension() const {
  return scheme_ == Scheme::kCharHistogram ? 256 : vocab_.size();
}

std::vector<std::string> Vectorizer::terms(std::span<const std::string> strings,
                                           const Dictionary* dictionary) const {
  std::vector<std::string> out;
  switch (scheme_) {
    case Scheme::kCharHistogram:
      for (const auto& s : apply_variant(strings, variant_, dictionary)) {
        for (const char c : s) out.emplace_back(1, c);
      }
      break;
    case Scheme::kCharNgram:
      for (const auto& s : apply_variant(strings, variant_, dictionary)) {
        for (std::size_t n = 1; n <= ngram_max_; ++n) {
          for (std::size_t i = 0; i + n <= s.size(); ++i) out.push_back(s.substr(i, n));
        }
      }
      break;
    case Scheme::kTfIdf:
    case Scheme::kCountFrequency:
      for (const auto& s : strings) {
        if (variant_ == Variant::kEnglishWords) {
          for (auto& w : english_words(s, require(dictionary))) out.push_back(std::move(w));
        } else {
          const std::string text = variant_ == Variant::kCaseInsensitive ? ascii_lower(s) : s;
          for (auto& t : tokenize(text)) out.push_back(std::move(t));
        }
      }
      break;
  }
  return out;
}

void Vectorizer::fit(std::span<const std::vector<std::string>> documents,
                     const Dictionary* dictionary) {
  vocab_.clear();
  if (scheme_ == Scheme::kCharHistogram) {
    idf_ = Eigen::VectorXd();
    return;
  }
  std::map<std::string, std::size_t> df;
  for (const auto& doc : documents) {
    std::set<std::string> seen;
    for (auto& t : terms(doc, dictionary)) seen.insert(std::move(t));
    for (const auto& t : seen) ++df[t];
  }
  idf_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(df.size()));
  std::size_t index = 0;
  const double n = static_cast<double>(documents.size());
  for (const auto& [term, count] : df) {
    vocab_.emplace(term, index);
    idf_[static_cast<Eigen::Index>(index)] = std::log10(n / static_cast<double>(count));
    ++index;
  }
}

FeatureVector Vectorizer::transform(std::span<const std::string> strings,
                                    const Dictionary* dictionary) const {
  FeatureVector fv;
  fv.scheme = scheme_;
  fv.variant = variant_;
  const auto dim = static_cast<Eigen::Index>(dimension());
  Eigen::VectorXd dense = Eigen::VectorXd::Zero(dim);
  if (scheme_ == Scheme::kCharHistogram) {
    for (const auto& s : apply_variant(strings, variant_, dictionary)) {
      for (const char c : s) dense[static_cast<unsigned char>(c)] += 1.0;
    }
  } else {
    std::map<std::string, double> unseen;
    for (const auto& t : terms(strings, dictionary)) {
      if (auto it = vocab_.find(t); it != vocab_.end()) {
        dense[static_cast<Eigen::Index>(it->second)] += 1.0;
      } else {
        unseen[t] += 1.0;
      }
    }
    // An unseen term is taken to be as rare as the rarest known one.
    double w = 1.0;
    if (scheme_ == Scheme::kTfIdf) {
      dense = dense.cwiseProduct(idf_);
      w = idf_.size() > 0 ? idf_.maxCoeff() : 0.0;
    }
    for (const auto& [_, count] : unseen) fv.unseen_mass += (w * count) * (w * count);
  }
  fv.values = dense.sparseView();
  return fv;
}

void Vectorizer::restore(std::map<std::string, std::size_t> vocab, Eigen::VectorXd idf) {
  vocab_ = std::move(vocab);
  idf_ = std::move(idf);
}

// ---------------------------------------------------------------------------
// Statistics

double f_test_p(double var_a, std::size_t n_a, double var_b, std::size_t n_b, double* f_out) {
  if (n_a < 2 || n_b < 2) throw std::invalid_argument("F-test needs two samples of size >= 2");
  if (var_a < var_b) {
    std::swap(var_a, var_b);
    std::swap(n_a, n_b);
  }
  if (var_a == 0.0) {
    if (f_out) *f_out = 1.0;
    return 1.0;
  }
  if (var_b == 0.0) {
    if (f_out) *f_out = std::numeric_limits<double>::infinity();
    return kMinPValue;
  }
  const double f = var_a / var_b;
  if (f_out) *f_out = f;
  const boost::math::fisher_f dist(static_cast<double>(n_a - 1), static_cast<double>(n_b - 1));
  const double upper = boost::math::cdf(boost::math::complement(dist, f));
  return std::clamp(2.0 * upper, kMinPValue, 1.0);
}

double z_test_p(double mean_a, double var_a, std::size_t n_a, double mean_b, double var_b,
                std::size_t n_b, double* z_out) {
  if (n_a == 0 || n_b == 0) throw std::invalid_argument("Z-test needs non-empty samples");
  const double se = std::sqrt(var_a / static_cast<double>(n_a) + var_b / static_cast<double>(n_b));
  const double diff = mean_a - mean_b;
  double z;
  if (se == 0.0) {
    z = diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  } else {
    z = diff / se;
  }
  if (z_out) *z_out = z;
  return std::clamp(std::erfc(std::abs(z) / std::sqrt(2.0)), kMinPValue, 1.0);
}

namespace {

struct Sample {
  double mean = 0.0;
  double var = 0.0;
  std::size_t n = 0;
};

Sample summarize(const std::vector<double>& xs) {
  Sample s;
  s.n = xs.size();
  if (s.n == 0) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double acc = 0.0;
    for (double x : xs) acc += (x - s.mean) * (x - s.mean);
    s.var = acc / static_cast<double>(s.n - 1);
  }
  return s;
}

std::vector<Eigen::VectorXd> unit_histograms(std::span<const std::vector<std::string>> groups,
                                             Variant variant, const Dictionary* dictionary,
                                             std::size_t& skipped) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& g : groups) {
    if (g.empty()) {
      ++skipped;
      continue;
    }
    Eigen::VectorXd v = Eigen::VectorXd(char_vector(g, variant, dictionary).values);
    const double n = v.norm();
    if (n == 0.0) {
      ++skipped;
      continue;
    }
    out.push_back(v / n);
  }
  return out;
}

}  // namespace

StudyReport separability_study(std::span<const std::vector<std::string>> secret,
                               std::span<const std::vector<std::string>> nosecret,
                               Variant variant, const Dictionary* dictionary,
                               std::size_t max_pairs, std::uint64_t seed) {
  StudyReport report;
  if (secret.empty() || nosecret.empty()) {
    throw std::invalid_argument("separability study needs two non-empty collections");
  }
  if (secret.size() != nosecret.size()) {
    report.warnings.push_back("collections are unbalanced: " + std::to_string(secret.size()) +
                              " secret vs " + std::to_string(nosecret.size()) + " no-secret");
  }
  const auto s = unit_histograms(secret, variant, dictionary, report.skipped_groups);
  const auto n = unit_histograms(nosecret, variant, dictionary, report.skipped_groups);
  if (report.skipped_groups > 0) {
    report.warnings.push_back(std::to_string(report.skipped_groups) +
                              " groups have empty features and were skipped");
  }
  if (s.size() < 2 || n.empty()) {
    throw std::invalid_argument("separability study needs >= 2 usable secret groups");
  }

  std::mt19937_64 rng(seed);
  std::vector<double> ss, sn;
  // Both comparisons range over every ordered pair, so identical
  // collections give identical samples.
  const std::size_t total_ss = s.size() * s.size();
  const std::size_t total_sn = s.size() * n.size();
  if (max_pairs == 0 || total_ss <= max_pairs) {
    ss.reserve(total_ss);
    for (const auto& a : s) {
      for (const auto& b : s) ss.push_back(a.dot(b));
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, s.size() - 1);
    for (std::size_t k = 0; k < max_pairs; ++k) ss.push_back(s[pick(rng)].dot(s[pick(rng)]));
  }
  if (max_pairs == 0 || total_sn <= max_pairs) {
    sn.reserve(total_sn);
    for (const auto& a : s) {
      for (const auto& b : n) sn.push_back(a.dot(b));
    }
  } else {
    std::uniform_int_distribution<std::size_t> pick_s(0, s.size() - 1), pick_n(0, n.size() - 1);
    for (std::size_t k = 0; k < max_pairs; ++k) sn.push_back(s[pick_s(rng)].dot(n[pick_n(rng)]));
  }

  const Sample a = summarize(ss), b = summarize(sn);
  report.mean_ss = a.mean;
  report.mean_sn = b.mean;
  report.var_ss = a.var;
  report.var_sn = b.var;
  report.pairs_ss = a.n;
  report.pairs_sn = b.n;
  if (a.n >= 2 && b.n >= 2) {
    report.f_p = f_test_p(a.var, a.n, b.var, b.n, &report.f_statistic);
  }
  report.z_p = z_test_p(a.mean, a.var, a.n, b.mean, b.var, b.n, &report.z_statistic);
  return report;
}

// ---------------------------------------------------------------------------
// Datasets

std::vector<LabeledGroup> parse_dataset_jsonl(std::string_view text) {
  std::vector<LabeledGroup> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      LabeledGroup g;
      g.group_id = j.value("group_id", std::to_string(lineno));
      g.strings = j.at("strings").get<std::vector<std::string>>();
      const auto& label = j.at("label");
      if (label.is_boolean()) g.secret = label.get<bool>();
      else if (label.is_number()) g.secret = label.get<int>() != 0;
      else {
        const auto s = label.get<std::string>();
        if (s == "secret") g.secret = true;
        else if (s == "no_secret" || s == "nosecret") g.secret = false;
        else throw std::invalid_argument("unknown label '" + s + "'");
      }
      out.push_back(std::move(g));
    } catch (const std::exception& e) {
      throw std::invalid_argument("dataset line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<LabeledGroup> load_dataset_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_dataset_jsonl(buf.str());
}

std::string dataset_to_jsonl(std::span<const LabeledGroup> entries) {
  std::string out;
  for (const auto& g : entries) {
    nlohmann::json j{{"group_id", g.group_id},
                     {"strings", g.strings},
                     {"label", g.secret ? "secret" : "no_secret"}};
    out += j.dump() + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Models

Metrics Metrics::from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  const auto d = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  m.precision = d(tp, tp + fp);
  m.recall = d(tp, tp + fn);
  m.accuracy = d(tp + tn, tp + fp + tn + fn);
  m.f1 = m.precision + m.recall == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

namespace {

SparseVec prepared(const TrainedModel& model, const FeatureVector& x) {
  if (x.scheme != model.vectorizer.scheme() || x.variant != model.vectorizer.variant()) {
    throw SchemeMismatch("feature vector scheme/variant differs from the model's");
  }
  if (static_cast<std::size_t>(x.values.size()) != model.vectorizer.dimension()) {
    throw SchemeMismatch("feature vector dimension differs from the model's vocabulary");
  }
  SparseVec v = x.values;
  if (model.normalize) {
    const double n = std::sqrt(v.squaredNorm() + x.unseen_mass);
    if (n > 0.0) v /= n;
  }
  return v;
}

SparseRows design_matrix(const TrainedModel& model, const std::vector<FeatureVector>& rows) {
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const SparseVec v = prepared(model, rows[r]);
    for (SparseVec::InnerIterator it(v); it; ++it) {
      triplets.emplace_back(static_cast<int>(r), static_cast<int>(it.index()), it.value());
    }
  }
  SparseRows x(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(model.vectorizer.dimension()));
  x.setFromTriplets(triplets.begin(), triplets.end());
  return x;
}

void train_logistic(TrainedModel& model, const SparseRows& x, const Eigen::VectorXd& y) {
  const auto& h = model.hyper;
  const double n = static_cast<double>(x.rows());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(x.cols());
  double b = 0.0;
  for (std::size_t epoch = 0; epoch < h.lr_epochs; ++epoch) {
    Eigen::VectorXd z = x * w;
    Eigen::VectorXd residual(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) residual[i] = sigmoid(z[i] + b) - y[i];
    const Eigen::VectorXd grad = (x.transpose() * residual) / n + h.lr_l2 * w;
    w -= h.lr_learning_rate * grad;
    b -= h.lr_learning_rate * residual.mean();
  }
  model.weights = std::move(w);
  model.bias = b;
}

void train_naive_bayes(TrainedModel& model, const SparseRows& x, const Eigen::VectorXd& y) {
  const double alpha = model.hyper.nb_alpha;
  const Eigen::Index dim = x.cols();
  Eigen::VectorXd pos = Eigen::VectorXd::Zero(dim), neg = Eigen::VectorXd::Zero(dim);
  double n_pos = 0.0, n_neg = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    Eigen::VectorXd& acc = y[r] > 0.5 ? pos : neg;
    (y[r] > 0.5 ? n_pos : n_neg) += 1.0;
    for (SparseRows::InnerIterator it(x, r); it; ++it) acc[it.col()] += it.value();
  }
  const double d = static_cast<double>(dim);
  const Eigen::VectorXd log_pos = ((pos.array() + alpha) / (pos.sum() + alpha * d)).log();
  const Eigen::VectorXd log_neg = ((neg.array() + alpha) / (neg.sum() + alpha * d)).log();
  model.weights = log_pos - log_neg;
  model.bias = std::log(n_pos / n_neg);
}

void train_svc(TrainedModel& model, const SparseRows& x, const Eigen::VectorXd& y) {
  const double lambda = model.hyper.svc_lambda;
  const Eigen::Index dim = x.cols();
  // w = scale * v; the bias is an augmented constant feature at index dim.
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim + 1);
  double scale = 1.0;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::mt19937_64 rng(model.seed ^ 0x9e3779b97f4a7c15ULL);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < model.hyper.svc_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (const auto r : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double label = y[r] > 0.5 ? 1.0 : -1.0;
      double dot = v[dim];
      for (SparseRows::InnerIterator it(x, r); it; ++it) dot += v[it.col()] * it.value();
      const double margin = label * scale * dot;
      const double shrink = 1.0 - eta * lambda;
      if (shrink <= 0.0) {
        v.setZero();
        scale = 1.0;
      } else {
        scale *= shrink;
      }
      if (margin < 1.0) {
        const double step = eta * label / scale;
        for (SparseRows::InnerIterator it(x, r); it; ++it) v[it.col()] += step * it.value();
        v[dim] += step;
      }
      if (scale < 1e-9) {
        v *= scale;
        scale = 1.0;
      }
    }
  }
  model.weights = scale * v.head(dim);
  model.bias = scale * v[dim];
}

struct Split {
  std::vector<std::size_t> train, test;
};

Split stratified_split(const std::vector<LabeledGroup>& entries, double fraction,
                       std::uint64_t seed) {
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < entries.size(); ++i) (entries[i].secret ? pos : neg).push_back(i);
  std::mt19937_64 rng(seed);
  Split split;
  for (auto* cls : {&pos, &neg}) {
    std::shuffle(cls->begin(), cls->end(), rng);
    const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(cls->size())));
    for (std::size_t k = 0; k < cls->size(); ++k) {
      (k < n_train ? split.train : split.test).push_back((*cls)[k]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

void check_classes(const std::vector<LabeledGroup>& entries, std::size_t min_per_class) {
  std::size_t pos = 0;
  for (const auto& e : entries) pos += e.secret ? 1 : 0;
  const std::size_t neg = entries.size() - pos;
  if (pos == 0 || neg == 0) throw DegenerateDataset("dataset has a single class");
  if (pos < min_per_class || neg < min_per_class) {
    throw DegenerateDataset("each class needs at least " + std::to_string(min_per_class) +
                            " entries (have " + std::to_string(pos) + " secret, " +
                            std::to_string(neg) + " no-secret)");
  }
}

TrainedModel train_on(const std::vector<LabeledGroup>& entries,
                      const std::vector<std::size_t>& rows, Variant variant,
                      const FitOptions& options, const Dictionary* dictionary) {
  TrainedModel model;
  model.kind = options.kind;
  model.hyper = options.hyper;
  model.seed = options.seed;
  model.split_ratio = options.train_fraction;
  model.normalize = options.kind != ModelKind::kNaiveBayes;
  model.vectorizer = Vectorizer(options.scheme, variant, options.ngram_max);
  std::vector<std::vector<std::string>> docs;
  docs.reserve(rows.size());
  for (auto r : rows) docs.push_back(entries[r].strings);
  model.vectorizer.fit(docs, dictionary);
  model.n_train = rows.size();

  std::vector<FeatureVector> features;
  features.reserve(rows.size());
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    features.push_back(model.vectorizer.transform(docs[i], dictionary));
    y[static_cast<Eigen::Index>(i)] = entries[rows[i]].secret ? 1.0 : 0.0;
  }
  const SparseRows x = design_matrix(model, features);
  switch (options.kind) {
    case ModelKind::kLogisticRegression: train_logistic(model, x, y); break;
    case ModelKind::kNaiveBayes: train_naive_bayes(model, x, y); break;
    case ModelKind::kLinearSvc: train_svc(model, x, y); break;
  }
  return model;
}

}  // namespace

double TrainedModel::decision(const FeatureVector& x) const {
  const SparseVec v = prepared(*this, x);
  double d = bias;
  for (SparseVec::InnerIterator it(v); it; ++it) d += weights[it.index()] * it.value();
  return d;
}

Prediction TrainedModel::predict(const FeatureVector& x) const {
  const double d = decision(x);
  return Prediction{d > 0.0, sigmoid(d)};
}

Prediction TrainedModel::predict(std::span<const std::string> strings,
                                 const Dictionary* dictionary) const {
  return predict(vectorizer.transform(strings, dictionary));
}

FitResult fit(const LabeledGroupDataset& dataset, const FitOptions& options,
              const Dictionary* dictionary) {
  check_classes(dataset.entries, options.min_per_class);
  if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0)) {
    throw std::invalid_argument("train fraction must lie in (0, 1)");
  }
  const Split split = stratified_split(dataset.entries, options.train_fraction, options.seed);
  FitResult result;
  result.model = train_on(dataset.entries, split.train, dataset.variant, options, dictionary);
  std::vector<LabeledGroup> test;
  test.reserve(split.test.size());
  for (auto i : split.test) test.push_back(dataset.entries[i]);
  result.metrics = evaluate(result.model, test, dictionary);
  return result;
}

TrainedModel fit_all(const LabeledGroupDataset& dataset, const FitOptions& options,
                     const Dictionary* dictionary) {
  check_classes(dataset.entries, options.min_per_class);
  std::vector<std::size_t> rows(dataset.entries.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  auto model = train_on(dataset.entries, rows, dataset.variant, options, dictionary);
  model.split_ratio = 1.0;
  return model;
}

Metrics evaluate(const TrainedModel& model, std::span<const LabeledGroup> entries,
                 const Dictionary* dictionary) {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (const auto& e : entries) {
    const bool p = model.predict(e.strings, dictionary).positive;
    if (p && e.secret) ++tp;
    else if (p) ++fp;
    else if (e.secret) ++fn;
    else ++tn;
  }
  return Metrics::from_counts(tp, fp, tn, fn);
}

Prediction predict_group(const TrainedModel& model, std::span<const std::string> strings,
                         const Dictionary* dictionary) {
  if (strings.empty()) throw EmptyGroup("cannot classify an empty string group");
  return model.predict(strings, dictionary);
}

Prediction intrinsic_classify(const std::string& s, const TrainedModel& model) {
  if (s.empty()) throw EmptyString("cannot classify an empty string");
  if (model.vectorizer.scheme() != Scheme::kCharNgram) {
    throw SchemeMismatch("intrinsic model must use the char_ngram scheme");
  }
  const std::string one[] = {s};
  return model.predict(one, nullptr);
}

Prediction context_classify(std::span<const std::string> window, const TrainedModel& model) {
  if (window.empty()) throw EmptyWindow("cannot classify an empty window");
  const auto scheme = model.vectorizer.scheme();
  if (scheme != Scheme::kCountFrequency && scheme != Scheme::kTfIdf) {
    throw SchemeMismatch("context model must use a token scheme");
  }
  return model.predict(window, nullptr);
}

// ---------------------------------------------------------------------------
// Model files

std::string model_to_json(const TrainedModel& model) {
  nlohmann::json vocab = nlohmann::json::object();
  for (const auto& [term, index] : model.vectorizer.vocabulary()) vocab[term] = index;
  const auto& idf = model.vectorizer.idf_weights();
  const auto& h = model.hyper;
  nlohmann::json j{
      {"kind", to_string(model.kind)},
      {"scheme", to_string(model.vectorizer.scheme())},
      {"variant", to_string(model.vectorizer.variant())},
      {"ngram_max", model.vectorizer.ngram_max()},
      {"vocabulary", vocab},
      {"idf", std::vector<double>(idf.data(), idf.data() + idf.size())},
      {"weights", std::vector<double>(model.weights.data(), model.weights.data() + model.weights.size())},
      {"bias", model.bias},
      {"normalize", model.normalize},
      {"metadata",
       {{"seed", model.seed},
        {"split_ratio", model.split_ratio},
        {"n_train", model.n_train},
        {"hyperparameters",
         {{"lr_learning_rate", h.lr_learning_rate},
          {"lr_epochs", h.lr_epochs},
          {"lr_l2", h.lr_l2},
          {"nb_alpha", h.nb_alpha},
          {"svc_lambda", h.svc_lambda},
          {"svc_epochs", h.svc_epochs}}}}}};
  return j.dump() + "\n";
}

TrainedModel model_from_json(std::string_view json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    TrainedModel m;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.vectorizer = Vectorizer(parse_scheme(j.at("scheme").get<std::string>()),
                              parse_variant(j.at("variant").get<std::string>()),
                              j.value("ngram_max", std::size_t{3}));
    std::map<std::string, std::size_t> vocab;
    for (const auto& [term, index] : j.at("vocabulary").items()) vocab.emplace(term, index.get<std::size_t>());
    const auto idf = j.at("idf").get<std::vector<double>>();
    const auto w = j.at("weights").get<std::vector<double>>();
    m.vectorizer.restore(std::move(vocab),
                         Eigen::Map<const Eigen::VectorXd>(idf.data(), static_cast<Eigen::Index>(idf.size())));
    m.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
    if (static_cast<std::size_t>(m.weights.size()) != m.vectorizer.dimension()) {
      throw ModelFormatError("weight count does not match the vocabulary");
    }
    m.bias = j.at("bias").get<double>();
    m.normalize = j.value("normalize", true);
    const auto& meta = j.at("metadata");
    m.seed = meta.value("seed", std::uint64_t{0});
    m.split_ratio = meta.value("split_ratio", 0.8);
    m.n_train = meta.value("n_train", std::size_t{0});
    if (meta.contains("hyperparameters")) {
      const auto& h = meta.at("hyperparameters");
      m.hyper.lr_learning_rate = h.value("lr_learning_rate", m.hyper.lr_learning_rate);
      m.hyper.lr_epochs = h.value("lr_epochs", m.hyper.lr_epochs);
      m.hyper.lr_l2 = h.value("lr_l2", m.hyper.lr_l2);
      m.hyper.nb_alpha = h.value("nb_alpha", m.hyper.nb_alpha);
      m.hyper.svc_lambda = h.value("svc_lambda", m.hyper.svc_lambda);
      m.hyper.svc_epochs = h.value("svc_epochs", m.hyper.svc_epochs);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model " + path);
  out << model_to_json(model);
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace secretsieve
