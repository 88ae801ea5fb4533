#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "clusterpool/clustering.hpp"
#include "clusterpool/general_pooling.hpp"
#include "clusterpool/mse_pooling.hpp"

namespace clusterpool {

struct CommonSigma {
  double sigma = 1.0;
};
struct PerProblemSigma {
  std::vector<double> sigma;
};

struct TwoClusterGenSpec {
  double a = 10.0;
  double b = 20.0;
  double d = 1.0;
  std::variant<CommonSigma, PerProblemSigma> sigma = CommonSigma{5.0};
  std::size_t K = 1000;
  std::size_t N = 10;
  std::uint64_t seed = 0;
  void validate() const;
};

struct NewsvendorGenSpec {
  double mu_low = 70.0;
  double mu_high = 120.0;
  double cv_mean = 0.2;
  double cv_sd = 0.0;
  std::size_t K = 1000;
  std::size_t N = 10;
  std::uint64_t seed = 0;
  void validate() const;
};

// Full samples per problem; the clustering/pooling split is applied by the caller.
struct TwoClusterInstance {
  std::vector<std::vector<double>> samples;
  std::vector<MseProblemMoments> truth;
  ClusterStructure true_clusters;
};
struct NewsvendorInstance {
  std::vector<std::vector<double>> samples;
  std::vector<Gaussian> truth;
};

TwoClusterInstance gen_two_cluster(const TwoClusterGenSpec& spec);
NewsvendorInstance gen_newsvendor(const NewsvendorGenSpec& spec);

std::vector<ProblemDataset> split_all(std::span<const std::vector<double>> samples, std::size_t n1);

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct SalesProblem {
  std::string problem_id;
  std::vector<long long> periods;  // ascending
  std::vector<double> values;      // aligned with periods
};
struct SalesData {
  std::vector<SalesProblem> problems;  // in order of first appearance
  std::vector<std::string> warnings;
};

SalesData read_sales_csv(std::istream& in);
SalesData read_sales_csv_file(const std::string& path);
// Groups rows per problem; the first n1 values become clustering samples.
std::vector<ProblemDataset> load_sales_csv(const std::string& path, std::size_t n1,
                                           std::vector<std::string>* warnings = nullptr);

struct TrainTestSplit {
  ProblemDataset train;
  std::vector<double> test;
};
TrainTestSplit subsample_split(std::span<const double> data, std::size_t n_train, std::size_t n1, std::uint64_t seed,
                               std::size_t problem_id = 0);

void write_sales_csv(std::ostream& os, std::span<const std::vector<double>> samples);
void write_truth_csv(std::ostream& os, std::span<const Gaussian> truth, std::span<const int> true_cluster);

}  // namespace clusterpool
