#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "secretsieve/three_layer.hpp"

namespace secretsieve {

class EmptyGroup : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class EmptyWindow : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class ZeroVector : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};
class SchemeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class DegenerateDataset : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Variant { kCaseSensitive, kCaseInsensitive, kEnglishWords };
enum class Scheme { kCharHistogram, kTfIdf, kCountFrequency, kCharNgram };
enum class ModelKind { kLogisticRegression, kNaiveBayes, kLinearSvc };

std::string_view to_string(Variant v);
std::string_view to_string(Scheme s);
std::string_view to_string(ModelKind k);
Variant parse_variant(std::string_view name);
Scheme parse_scheme(std::string_view name);
ModelKind parse_model_kind(std::string_view name);

using SparseVec = Eigen::SparseVector<double>;
using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct FeatureVector {
  Scheme scheme = Scheme::kCharHistogram;
  Variant variant = Variant::kCaseSensitive;
  SparseVec values;
  /// Squared weight of terms outside the vocabulary; counts toward the row norm.
  double unseen_mass = 0.0;

  double operator[](Eigen::Index i) const { return values.coeff(i); }
};

/// Letter runs of `s`, split at lower-to-upper case changes, lowercased, and
/// kept only when the dictionary knows them.
std::vector<std::string> english_words(std::string_view s, const Dictionary& dictionary);

/// Applies the variant's preprocessing to every string. The dictionary is
/// required for kEnglishWords.
std::vector<std::string> apply_variant(std::span<const std::string> strings, Variant variant,
                                       const Dictionary* dictionary = nullptr);

/// Maximal runs of [A-Za-z0-9_] of length >= 2.
std::vector<std::string> tokenize(std::string_view s);

/// 256-bin byte histogram of the preprocessed, concatenated strings.
FeatureVector char_vector(std::span<const std::string> strings, Variant variant,
                          const Dictionary* dictionary = nullptr);

double cosine_similarity(const FeatureVector& x, const FeatureVector& y);

/// Raw count of `term` among `terms`.
double tf(std::string_view term, std::span<const std::string> terms);
/// log10(N / df), with df counted over documents given as term lists.
double idf(std::string_view term, std::span<const std::vector<std::string>> documents);

/// Turns a string list into a feature vector for one scheme and variant.
/// Term schemes learn a vocabulary (and idf weights for tf-idf) in fit().
class Vectorizer {
 public:
  Vectorizer() = default;
  Vectorizer(Scheme scheme, Variant variant, std::size_t ngram_max = 3);

  Scheme scheme() const noexcept { return scheme_; }
  Variant variant() const noexcept { return variant_; }
  std::size_t ngram_max() const noexcept { return ngram_max_; }
  std::size_t dimension() const;
  const std::map<std::string, std::size_t>& vocabulary() const noexcept { return vocab_; }
  const Eigen::VectorXd& idf_weights() const noexcept { return idf_; }

  /// Terms counted by the scheme (tokens or character n-grams).
  std::vector<std::string> terms(std::span<const std::string> strings,
                                 const Dictionary* dictionary) const;

  void fit(std::span<const std::vector<std::string>> documents, const Dictionary* dictionary);
  /// Unknown terms get weight 0 but still count toward the row norm.
  FeatureVector transform(std::span<const std::string> strings,
                          const Dictionary* dictionary) const;

  void restore(std::map<std::string, std::size_t> vocab, Eigen::VectorXd idf);

 private:
  Scheme scheme_ = Scheme::kCountFrequency;
  Variant variant_ = Variant::kCaseSensitive;
  std::size_t ngram_max_ = 3;
  std::map<std::string, std::size_t> vocab_;
  Eigen::VectorXd idf_;
};

struct StudyReport {
  double mean_ss = 0.0;
  double mean_sn = 0.0;
  double var_ss = 0.0;  // sample variances of the similarity samples
  double var_sn = 0.0;
  std::size_t pairs_ss = 0;
  std::size_t pairs_sn = 0;
  std::size_t skipped_groups = 0;  // groups whose vector was all zero
  double f_statistic = 0.0;
  double f_p = 1.0;
  double z_statistic = 0.0;
  double z_p = 1.0;
  std::vector<std::string> warnings;
};

inline constexpr double kMinPValue = 1e-300;

/// Two-tailed p-value of a variance-ratio F-test (larger variance on top).
double f_test_p(double var_a, std::size_t n_a, double var_b, std::size_t n_b, double* f = nullptr);
/// Two-tailed p-value of a two-sample Z-test on means.
double z_test_p(double mean_a, double var_a, std::size_t n_a, double mean_b, double var_b,
                std::size_t n_b, double* z = nullptr);

/// Within-secret vs secret-to-nosecret cosine similarity of char vectors.
/// `max_pairs` > 0 caps each sample by deterministic subsampling.
StudyReport separability_study(std::span<const std::vector<std::string>> secret,
                               std::span<const std::vector<std::string>> nosecret,
                               Variant variant, const Dictionary* dictionary = nullptr,
                               std::size_t max_pairs = 0, std::uint64_t seed = 0);

struct LabeledGroup {
  std::string group_id;
  std::vector<std::string> strings;
  bool secret = false;
};

struct LabeledGroupDataset {
  std::vector<LabeledGroup> entries;
  Variant variant = Variant::kCaseSensitive;
};

/// JSON lines {group_id, strings[], label}; label is "secret" or "no_secret"
/// (booleans and 0/1 are accepted too).
std::vector<LabeledGroup> parse_dataset_jsonl(std::string_view text);
std::vector<LabeledGroup> load_dataset_jsonl(const std::string& path);
std::string dataset_to_jsonl(std::span<const LabeledGroup> entries);

struct Hyperparameters {
  double lr_learning_rate = 2.0;
  std::size_t lr_epochs = 1000;
  double lr_l2 = 1e-4;
  double nb_alpha = 1.0;
  double svc_lambda = 1e-3;
  std::size_t svc_epochs = 1000;
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  static Metrics from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);
  bool operator==(const Metrics&) const = default;
};

struct Prediction {
  bool positive = false;
  double score = 0.0;  // in [0, 1]
};

/// Linear decision function over vectorized strings. Naive Bayes is stored
/// in its equivalent linear form: per-term log-likelihood ratios plus the
/// log prior ratio.
struct TrainedModel {
  ModelKind kind = ModelKind::kLinearSvc;
  Vectorizer vectorizer;
  Eigen::VectorXd weights;
  double bias = 0.0;
  bool normalize = true;  // L2-normalize rows before the linear map
  Hyperparameters hyper;
  std::uint64_t seed = 0;
  double split_ratio = 0.8;
  std::size_t n_train = 0;

  double decision(const FeatureVector& x) const;
  Prediction predict(const FeatureVector& x) const;
  Prediction predict(std::span<const std::string> strings, const Dictionary* dictionary) const;
};

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(std::string_view json_text);
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

struct FitResult {
  TrainedModel model;
  Metrics metrics;  // on the held-out split
};

struct FitOptions {
  ModelKind kind = ModelKind::kLinearSvc;
  Scheme scheme = Scheme::kCountFrequency;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  Hyperparameters hyper;
  std::size_t min_per_class = 10;
  std::size_t ngram_max = 3;
};

/// Stratified train/test split, vocabulary from the training part only.
FitResult fit(const LabeledGroupDataset& dataset, const FitOptions& options,
              const Dictionary* dictionary = nullptr);
/// Fits on every entry (no held-out split).
TrainedModel fit_all(const LabeledGroupDataset& dataset, const FitOptions& options,
                     const Dictionary* dictionary = nullptr);

Metrics evaluate(const TrainedModel& model, std::span<const LabeledGroup> entries,
                 const Dictionary* dictionary = nullptr);

Prediction predict_group(const TrainedModel& model, std::span<const std::string> strings,
                         const Dictionary* dictionary = nullptr);

/// Requires a char_ngram model; throws EmptyString for "".
Prediction intrinsic_classify(const std::string& s, const TrainedModel& model);

/// Window rendered as IR text lines; throws EmptyWindow when empty.
Prediction context_classify(std::span<const std::string> window, const TrainedModel& model);

}  // namespace secretsieve
