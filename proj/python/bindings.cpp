#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "clusterpool/cli.hpp"
#include "clusterpool/clustering.hpp"
#include "clusterpool/datagen.hpp"
#include "clusterpool/general_pooling.hpp"
#include "clusterpool/mse_pooling.hpp"

namespace py = pybind11;
using namespace clusterpool;

namespace {

std::vector<MseProblemMoments> moments(const std::vector<double>& mu, const std::vector<double>& sigma2) {
  if (mu.size() != sigma2.size()) throw std::invalid_argument("mu and sigma2 must have the same length");
  std::vector<MseProblemMoments> m(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) m[k] = {mu[k], sigma2[k]};
  return m;
}

std::vector<ProblemDataset> pooled(const std::vector<std::vector<double>>& samples) {
  std::vector<ProblemDataset> out;
  for (std::size_t k = 0; k < samples.size(); ++k) out.push_back(ProblemDataset::split(k, samples[k], 0));
  return out;
}

AnchorSpec anchor_from(const std::vector<double>& atoms) {
  if (atoms.size() == 1) return PointMass{atoms[0]};
  return EmpiricalAnchor::from_samples(atoms);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Cluster-based data pooling";

  py::class_<MseCost>(m, "MseCost").def(py::init<>());
  py::class_<NewsvendorCost>(m, "NewsvendorCost")
      .def(py::init<double, double>(), py::arg("holding") = 1.0, py::arg("backorder") = 19.0)
      .def_readwrite("holding", &NewsvendorCost::holding)
      .def_readwrite("backorder", &NewsvendorCost::backorder)
      .def_property_readonly("critical_ratio", &NewsvendorCost::critical_ratio);

  m.def("shrunken_decision", &shrunken_decision, py::arg("alpha"), py::arg("anchor_mean"), py::arg("sample_mean"),
        py::arg("n"));
  m.def(
      "apriori_params",
      [](const std::vector<double>& mu, const std::vector<double>& sigma2) {
        const auto p = apriori_params(moments(mu, sigma2));
        return py::make_tuple(p.alpha, p.anchor_mean);
      },
      py::arg("mu"), py::arg("sigma2"), "(alpha, anchor) minimizing expected MSE for known moments");
  m.def(
      "expected_cost_mse",
      [](double alpha, double anchor, const std::vector<double>& mu, const std::vector<double>& sigma2, int n) {
        return expected_cost_mse({alpha, anchor}, moments(mu, sigma2), n);
      },
      py::arg("alpha"), py::arg("anchor"), py::arg("mu"), py::arg("sigma2"), py::arg("n"));
  m.def(
      "data_driven_params",
      [](const std::vector<std::vector<double>>& samples) {
        std::vector<MseSampleStats> st;
        for (const auto& s : samples) st.push_back(MseSampleStats::from_samples(s));
        const auto p = data_driven_params(st);
        return py::make_tuple(p.alpha, p.anchor_mean);
      },
      py::arg("samples"));
  m.def("gamma_within_cluster_d0", &gamma_within_cluster_d0, py::arg("a"), py::arg("b"), py::arg("sigma"),
        py::arg("n1"));
  m.def("misclassification_bound", &misclassification_bound, py::arg("d"), py::arg("width"), py::arg("n1"),
        py::arg("sigma_max"));
  m.def("no_benefit_predicate", &no_benefit_predicate, py::arg("y_tilde"), py::arg("n1"));

  m.def(
      "shrunken_solution",
      [](const CostModel& model, double alpha, const std::vector<double>& anchor, const std::vector<double>& data) {
        return shrunken_solution(model, alpha, anchor_from(anchor), data);
      },
      py::arg("model"), py::arg("alpha"), py::arg("anchor"), py::arg("data"),
      "anchor is a list of atoms; a single atom is a point mass");
  m.def(
      "loo_scores",
      [](const CostModel& model, const std::vector<std::vector<double>>& samples, const std::vector<double>& anchor,
         const std::vector<double>& grid) {
        return loo_scores(model, pooled(samples), anchor_from(anchor), AlphaGrid{grid});
      },
      py::arg("model"), py::arg("samples"), py::arg("anchor"), py::arg("grid"));
  m.def(
      "loo_select_alpha",
      [](const CostModel& model, const std::vector<std::vector<double>>& samples, const std::vector<double>& anchor,
         const std::vector<double>& grid) {
        return loo_select_alpha(model, pooled(samples), anchor_from(anchor), AlphaGrid{grid});
      },
      py::arg("model"), py::arg("samples"), py::arg("anchor"), py::arg("grid"));
  m.def("default_grid", [] { return AlphaGrid::default_grid().values; });

  m.def(
      "bisect_cluster",
      [](const std::vector<double>& stats, std::size_t k_min) { return bisect_cluster(stats, k_min).assignments; },
      py::arg("stats"), py::arg("k_min"), "cluster id per problem");

  m.def(
      "gen_two_cluster",
      [](double a, double b, double d, double sigma, std::size_t K, std::size_t N, std::uint64_t seed) {
        auto inst = gen_two_cluster({a, b, d, CommonSigma{sigma}, K, N, seed});
        return py::make_tuple(inst.samples, inst.true_clusters.assignments);
      },
      py::arg("a") = 10.0, py::arg("b") = 20.0, py::arg("d") = 1.0, py::arg("sigma") = 5.0, py::arg("K") = 1000,
      py::arg("N") = 10, py::arg("seed") = 0, "(samples, true cluster per problem)");
  m.def(
      "gen_newsvendor",
      [](double mu_low, double mu_high, double cv_mean, double cv_sd, std::size_t K, std::size_t N,
         std::uint64_t seed) { return gen_newsvendor({mu_low, mu_high, cv_mean, cv_sd, K, N, seed}).samples; },
      py::arg("mu_low") = 70.0, py::arg("mu_high") = 120.0, py::arg("cv_mean") = 0.2, py::arg("cv_sd") = 0.0,
      py::arg("K") = 1000, py::arg("N") = 10, py::arg("seed") = 0);

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "clusterpool");
        std::ostringstream out, err;
        const int rc = run_cli(args, out, err);
        return py::make_tuple(rc, out.str(), err.str());
      },
      py::arg("args"), "(exit code, stdout, stderr)");
}
