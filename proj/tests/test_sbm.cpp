#include <doctest.h>

#include <cmath>
#include <limits>

#include "sgcl/global_embed.hpp"
#include "sgcl/sbm.hpp"
#include "sgcl/spectral.hpp"

using namespace sgcl;

namespace {

Matrix adjacency_of(const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  Matrix a = Matrix::Zero(n, n);
  for (NodeId u = 0; u < g.num_nodes(); ++u)
    for (NodeId v : g.neighbors(u)) a(u, v) = 1.0;
  return a;
}

SbmSpec random_spec(Rng& rng) {
  while (true) {
    const double p = 0.05 + 0.95 * uniform01(rng);
    const double q = p * uniform01(rng);
    const double z = q * uniform01(rng);
    if (z > 0.0 && z < q && q < p && p * q > z * z) return SbmSpec::make(10, p, q, z);
  }
}

}  // namespace

TEST_CASE("spec construction guards") {
  CHECK_THROWS_AS(SbmSpec::make(10, 1.0, 1.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(SbmSpec::make(10, 0.5, 0.3, 0.3), InvalidArgument);
  CHECK_THROWS_AS(SbmSpec::make(10, 0.3, 0.5, 0.1), InvalidArgument);
  CHECK_THROWS_AS(SbmSpec::make(0, 0.5, 0.3, 0.1), InvalidArgument);
  CHECK_NOTHROW(SbmSpec::make(10, 0.5, 0.3, 0.1));
}

TEST_CASE("within-block edge count matches the binomial") {
  const auto spec = SbmSpec::make(100, 0.5, 0.3, 0.1);
  // Self-loops on: N (N + 1) / 2 Bernoulli(p) slots inside block 0.
  const double slots = 100.0 * 101.0 / 2.0;
  const double mean = slots * 0.5;
  const double sd = std::sqrt(slots * 0.25);
  for (Seed s = 0; s < 10; ++s) {
    const auto sample = sample_sbm(spec, s);
    std::size_t count = 0;
    for (const auto& [u, v] : sample.graph.edge_list()) count += (u < 100 && v < 100);
    CHECK(std::abs(static_cast<double>(count) - mean) <= 4.0 * sd);
    CHECK(sample.labels[0] == 0);
    CHECK(sample.labels[199] == 1);
  }
  CHECK(sample_sbm(spec, 3).graph == sample_sbm(spec, 3).graph);
  CHECK_FALSE(sample_sbm(spec, 3).graph == sample_sbm(spec, 4).graph);
}

TEST_CASE("block eigenpairs worked example") {
  const auto b = block_eigenpairs(0.5, 0.3, 0.1);
  CHECK(b.c_plus == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-14));
  CHECK(b.c_minus == doctest::Approx(-1.0 - std::sqrt(2.0)).epsilon(1e-14));
  CHECK(std::abs(b.mu1 - 0.541421) < 1e-6);
  CHECK(std::abs(b.mu2 - 0.258579) < 1e-6);
  const auto sym = block_eigenpairs(0.4, 0.4, 0.1);
  CHECK(sym.c_plus == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sym.c_minus == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK_THROWS_AS(block_eigenpairs(0.5, 0.3, 0.0), InvalidArgument);
}

TEST_CASE("block eigenpairs agree with a dense 2x2 solve") {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const auto spec = random_spec(rng);
    const auto b = block_eigenpairs(spec.p, spec.q, spec.z);
    Matrix w(2, 2);
    w << spec.p, spec.z, spec.z, spec.q;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(w);
    CHECK(std::abs(b.mu1 - solver.eigenvalues()(1)) < 1e-12);
    CHECK(std::abs(b.mu2 - solver.eigenvalues()(0)) < 1e-12);
    CHECK(std::abs(b.mu1 + b.mu2 - (spec.p + spec.q)) < 1e-12);
    CHECK(std::abs(b.mu1 * b.mu2 - (spec.p * spec.q - spec.z * spec.z)) < 1e-12);
    CHECK(b.c_plus > 0.0);
    CHECK(b.c_minus < 0.0);
    // (1, c) is the eigenvector for mu = p + z c.
    Vector v(2);
    v << 1.0, b.c_plus;
    CHECK((w * v - b.mu1 * v).norm() < 1e-12);
  }
}

TEST_CASE("transformed parameters") {
  const auto t = line_transformed_params(0.5, 0.3, 0.1);
  CHECK(std::abs(t.p - 0.328504) < 1e-6);
  CHECK(std::abs(t.q - 0.628609) < 1e-6);
  CHECK(std::abs(t.z + 0.875469) < 1e-6);
  const auto sym = line_transformed_params(0.4, 0.4, 0.1);
  CHECK(sym.p == doctest::Approx(sym.q).epsilon(1e-15));

  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto spec = random_spec(rng);
    const auto tp = line_transformed_params(spec.p, spec.q, spec.z);
    CHECK(tp.p > 0.0);
    CHECK(tp.z < 0.0);
    CHECK(tp.p < tp.q);
    Matrix w(2, 2);
    w << spec.p, spec.z, spec.z, spec.q;
    NetMfOptions options;
    options.volume_scaling = true;
    options.log_floor = 1e-300;
    const Matrix m = netmf_matrix_dense(w, options);
    CHECK(std::abs(m(0, 0) - tp.p) < 1e-10);
    CHECK(std::abs(m(1, 1) - tp.q) < 1e-10);
    CHECK(std::abs(m(0, 1) - tp.z) < 1e-10);
  }
}

TEST_CASE("expectation lifts the 2x2 spectrum") {
  for (std::size_t n : {5u, 20u, 50u}) {
    const auto spec = SbmSpec::make(n, 0.6, 0.35, 0.15);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sbm_expectation(spec));
    const auto& ev = solver.eigenvalues();
    const auto b = block_eigenpairs(spec.p, spec.q, spec.z);
    const auto size = ev.size();
    CHECK(std::abs(ev(size - 1) - n * b.mu1) < 1e-10);
    CHECK(std::abs(ev(size - 2) - n * b.mu2) < 1e-10);
    for (Eigen::Index i = 0; i + 2 < size; ++i) CHECK(std::abs(ev(i)) < 1e-10);
  }
}

TEST_CASE("operator norm by power iteration") {
  Matrix m(3, 3);
  m << 2, 0, 0, 0, -5, 0, 0, 0, 1;
  CHECK(operator_norm(m) == doctest::Approx(5.0).epsilon(1e-5));
  CHECK(operator_norm(Matrix::Zero(4, 4)) == 0.0);
}

TEST_CASE("perturbation norm stays under the sqrt(18 p N) envelope") {
  for (std::size_t n : {50u, 100u, 200u, 400u}) {
    const auto spec = SbmSpec::make(n, 0.5, 0.3, 0.1);
    const auto sample = sample_sbm(spec, n);
    const double norm = operator_norm(adjacency_of(sample.graph) - sbm_expectation(spec));
    CHECK(norm <= std::sqrt(18.0 * spec.p * static_cast<double>(n)));
    CHECK(norm / std::sqrt(static_cast<double>(n)) <= std::sqrt(18.0 * spec.p));
  }
}

TEST_CASE("davis-kahan check") {
  const auto spec = SbmSpec::make(30, 0.5, 0.3, 0.1);
  const Matrix e = sbm_expectation(spec);
  const auto zero = davis_kahan_check(e, e, 2);
  CHECK(zero.theta < 1e-7);
  CHECK(zero.gap_defined);
  CHECK(zero.classical_satisfied);
  const auto sample = sample_sbm(spec, 1);
  const auto report = davis_kahan_check(e, adjacency_of(sample.graph), 2);
  CHECK(report.theta >= 0.0);
  CHECK(report.theta <= std::acos(0.0) + 1e-15);
  CHECK(report.classical_bound == doctest::Approx(2.0 * report.perturbation_norm / report.eigengap));
  CHECK(report.printed_bound == doctest::Approx(report.classical_bound / 60.0));
  // Index 3 sits inside the zero eigenspace, so the gap is undefined.
  const auto degenerate = davis_kahan_check(e, adjacency_of(sample.graph), 3);
  CHECK_FALSE(degenerate.gap_defined);
  CHECK_FALSE(degenerate.classical_satisfied);
}

TEST_CASE("majority label") {
  const std::vector<int> labels{0, 0, 1, 1, 1};
  CHECK(majority_label(std::vector<NodeId>{0, 1, 2}, labels) == 0);
  CHECK(majority_label(std::vector<NodeId>{2, 3}, labels) == 1);
  CHECK(majority_label(std::vector<NodeId>{0, 2}, labels) == -1);
}

TEST_CASE("fidelity extremes") {
  const auto spec = SbmSpec::make(40, 0.5, 0.3, 0.05);
  FidelityOptions zero;
  zero.epsilon = 0.0;
  zero.num_centers = 20;
  const auto tight = crop_fidelity_experiment(spec, zero, 3);
  CHECK(tight.crop_matches == tight.centers);
  FidelityOptions all = zero;
  all.epsilon = std::numeric_limits<double>::infinity();
  const auto wide = crop_fidelity_experiment(spec, all, 3);
  CHECK(wide.crop_ties == wide.centers);
  CHECK(wide.crop_matches == 0);
  CHECK(wide.mean_crop_size == 80.0);
}

TEST_CASE("fidelity at moderate size") {
  const auto spec = SbmSpec::make(100, 0.5, 0.3, 0.05);
  const auto report = crop_fidelity_experiment(spec, {}, 7);
  CHECK(report.centers == 50);
  CHECK(report.epsilon > 0.0);
  CHECK(report.crop_fraction() >= 0.8);
  FidelityOptions adj;
  adj.basis = FidelityBasis::adjacency;
  const auto a = crop_fidelity_experiment(spec, adj, 7);
  CHECK(a.crop_fraction() >= 0.8);
}

TEST_CASE("quintile report") {
  const std::vector<double> five{0.5, 0.1, 0.9, 0.3, 0.7};
  const std::vector<double> scores{1, 2, 3, 4, 5};
  const auto r = quintile_report_from_values(five, scores);
  for (std::size_t q = 0; q < 5; ++q) CHECK(r.members[q].size() == 1);
  CHECK(r.members[0][0] == 1);
  CHECK(r.means[4] == 3.0);

  const std::vector<double> same(10, 0.4);
  std::vector<double> idx(10);
  for (int i = 0; i < 10; ++i) idx[i] = i;
  const auto tied = quintile_report_from_values(same, idx);
  CHECK(tied.members[0] == std::vector<std::size_t>{0, 1});
  CHECK(tied.members[4] == std::vector<std::size_t>{8, 9});

  std::vector<double> l2(25), rank(25);
  for (int i = 0; i < 25; ++i) {
    l2[i] = 1.0 - 0.03 * i;
    rank[i] = 25 - i;
  }
  const auto ranked = quintile_report_from_values(l2, rank);
  const double expected[5] = {3, 8, 13, 18, 23};
  for (int q = 0; q < 5; ++q) CHECK(ranked.means[q] == expected[q]);

  std::vector<Graph> graphs{path_graph(5), complete_graph(5), cycle_graph(5), path_graph(9), complete_graph(3)};
  const auto real = quintile_report(graphs, scores);
  CHECK(real.lambda2[1] == doctest::Approx(lambda2(complete_graph(5))));
  CHECK(real.members[4][0] == 4);
}
