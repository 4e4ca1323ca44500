#include "hardylab/cli_ops.hpp"
#include "hardylab/config.hpp"

#include <doctest.h>

using namespace hardylab;

namespace {

const char* kGood = R"(
# full configuration exercising every section
[domain]
r_lo = 0.1
r_hi = 10
dim_n = 3
measure = radial

[discretization]
n_cells = 50
grading = geometric
quad_order = 4

[weights]
family = power
gamma = -2
beta = 0
sigma = 0
p = 2

[problem]
lambda = 0.125
m_cap = 1e3
potential_scale = 1
initial = gaussian
T = 0.1

[time]
scheme = rk2
dt = 1e-4
safety = 0.5

[hardy]
ladder = 100:1e-1:10,200:1e-2:10
multistart = 5
tol = 1e-9
)";

std::string with_line(const std::string& extra) {
  return std::string(kGood) + "\n" + extra + "\n";
}

}  // namespace

TEST_CASE("a complete config parses into every section") {
  RunConfig cfg = parse_config(kGood);
  REQUIRE(cfg.domain);
  CHECK(cfg.domain->r_lo == doctest::Approx(0.1));
  CHECK(cfg.domain->measure == Measure::radial);
  REQUIRE(cfg.discretization);
  CHECK(cfg.discretization->grading == Grading::geometric);
  REQUIRE(cfg.weights);
  CHECK(cfg.weights->family == WeightsFamily::power);
  CHECK(cfg.weights->gamma == doctest::Approx(-2.0));
  REQUIRE(cfg.problem);
  CHECK(cfg.problem->initial == InitialKind::gaussian);
  REQUIRE(cfg.time);
  CHECK(cfg.time->scheme == TimeScheme::rk2);
  REQUIRE(cfg.hardy);
  REQUIRE(cfg.hardy->ladder.size() == 2);
  CHECK(cfg.hardy->ladder[1].n_cells == 200);
  CHECK(cfg.hardy->ladder[1].r_lo == doctest::Approx(1e-2));
}

TEST_CASE("sections are optional at parse time") {
  RunConfig cfg = parse_config("[weights]\nfamily = power\ngamma = -2\n"
                               "beta = 0\nsigma = 0\np = 2\n");
  CHECK(cfg.weights);
  CHECK_FALSE(cfg.domain);
  CHECK_FALSE(cfg.time);
}

namespace {

void expect_rejected(const std::string& text, const std::string& needle) {
  try {
    parse_config(text);
    FAIL("expected ConfigError for: " << needle);
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("unknown keys and sections are rejected by name") {
  expect_rejected(with_line("[domain2]\nx = 1"), "domain2");
  expect_rejected("[domain]\nr_lo = 1\nbogus_key = 2\n", "bogus_key");
  expect_rejected("[hardy]\nladder = default\nmultistart = 5\ntol = 1e-9\n"
                  "verbose = yes\n",
                  "verbose");
}

TEST_CASE("missing and duplicate keys are rejected") {
  expect_rejected("[domain]\nr_lo = 1\nr_hi = 2\ndim_n = 3\n", "measure");
  expect_rejected(
      "[domain]\nr_lo = 1\nr_lo = 2\nr_hi = 3\ndim_n = 3\nmeasure = radial\n",
      "duplicate key 'r_lo'");
  expect_rejected(std::string(kGood) + "\n[domain]\nr_lo = 1\n",
                  "duplicate section");
}

TEST_CASE("values are range-checked with diagnostics") {
  auto replaced = [](std::string text, const std::string& from,
                     const std::string& to) {
    text.replace(text.find(from), from.size(), to);
    return text;
  };
  const std::string good(kGood);
  // admissible range: 2 <= p < N
  expect_rejected(replaced(good, "p = 2", "p = 1.5"), "p >= 2");
  expect_rejected(replaced(good, "p = 2", "p = 3"), "p < dim_n");
  expect_rejected(replaced(good, "r_lo = 0.1", "r_lo = 20"), "r_lo < r_hi");
  expect_rejected(replaced(good, "r_lo = 0.1", "r_lo = 0"), "r_lo > 0");
  expect_rejected(replaced(good, "measure = radial", "measure = spherical"),
                  "spherical");
  expect_rejected(replaced(good, "n_cells = 50", "n_cells = 1"), "n_cells");
  expect_rejected(replaced(good, "quad_order = 4", "quad_order = 31"),
                  "quad_order");
  expect_rejected(replaced(good, "grading = geometric", "grading = magic"),
                  "magic");
  expect_rejected(replaced(good, "family = power", "family = nonsense"),
                  "nonsense");
  expect_rejected(replaced(good, "lambda = 0.125", "lambda = -1"), "lambda");
  expect_rejected(replaced(good, "m_cap = 1e3", "m_cap = 0"), "m_cap");
  expect_rejected(replaced(good, "potential_scale = 1",
                           "potential_scale = 1.5"),
                  "potential_scale");
  expect_rejected(replaced(good, "initial = gaussian", "initial = spike"),
                  "spike");
  expect_rejected(replaced(good, "T = 0.1", "T = -1"), "T");
  expect_rejected(replaced(good, "scheme = rk2", "scheme = euler"), "euler");
  expect_rejected(replaced(good, "dt = 1e-4", "dt = -1"), "dt");
  expect_rejected(replaced(good, "safety = 0.5", "safety = 0"), "safety");
  expect_rejected(replaced(good, "multistart = 5", "multistart = 0"),
                  "multistart");
  expect_rejected(replaced(good, "tol = 1e-9", "tol = 0"), "tol");
  expect_rejected(replaced(good, "dim_n = 3", "dim_n = x"), "integer");
  expect_rejected(replaced(good, "r_hi = 10", "r_hi = ten"), "number");
  expect_rejected(replaced(good, "ladder = 100:1e-1:10,200:1e-2:10",
                           "ladder = 100:1e-1"),
                  "ladder");
}

TEST_CASE("malformed syntax is rejected with line numbers") {
  expect_rejected("[domain\nr_lo = 1\n", "line 1");
  expect_rejected("r_lo = 1\n", "outside any [section]");
  expect_rejected("[domain]\nr_lo\n", "key = value");
}

TEST_CASE("load_config reports an unreadable path") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("make_pair_from_config builds each family") {
  RunConfig cfg = parse_config(kGood);
  WeightPair power = make_pair_from_config(*cfg.weights, *cfg.domain);
  CHECK(power.family_tag == FamilyTag::power);
  REQUIRE(power.claimed_K);
  CHECK(*power.claimed_K == doctest::Approx(0.25));

  WeightsConfig w = *cfg.weights;
  w.family = WeightsFamily::confining;
  w.gamma = 3.0;
  WeightPair conf = make_pair_from_config(w, *cfg.domain);
  REQUIRE(conf.claimed_K);
  CHECK(*conf.claimed_K == doctest::Approx(12.0));

  w.family = WeightsFamily::superharmonic;
  w.beta = 3.0;
  w.sigma = 0.5;
  WeightPair super = make_pair_from_config(w, *cfg.domain);
  REQUIRE(super.claimed_K);
  CHECK(*super.claimed_K == doctest::Approx(hardy_constant(3.0, 0.5, 2.0)));

  w.family = WeightsFamily::identity;
  WeightPair id = make_pair_from_config(w, *cfg.domain);
  CHECK(id.omega1(3.7) == doctest::Approx(1.0));
  CHECK_FALSE(id.claimed_K);

  w.family = WeightsFamily::expdecay;
  WeightPair bad = make_pair_from_config(w, *cfg.domain);
  CHECK(bad.omega2(0.0) == doctest::Approx(0.0));
}

TEST_CASE("hat_interpolant reproduces nodal values and vanishes outside") {
  RadialDomain dom(0.0, 1.0, 3, Measure::flat);
  Mesh mesh = build_mesh(dom, 4, Grading::uniform);
  Eigen::VectorXd c(3);
  c << 1.0, -2.0, 0.5;
  RadialFn f = hat_interpolant(mesh, c);
  CHECK(f(0.25) == doctest::Approx(1.0));
  CHECK(f(0.5) == doctest::Approx(-2.0));
  CHECK(f(0.375) == doctest::Approx(-0.5));
  CHECK(f(0.0) == doctest::Approx(0.0));
  CHECK(f(1.5) == doctest::Approx(0.0));
  CHECK_THROWS_AS(hat_interpolant(mesh, Eigen::VectorXd::Ones(2)),
                  std::domain_error);
}
