#include "hardylab/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace hardylab {

namespace {

struct RawEntry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, RawEntry>;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw ConfigError("config error (line " + std::to_string(line) + "): " +
                    msg);
}

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"domain", {"r_lo", "r_hi", "dim_n", "measure"}},
      {"discretization", {"n_cells", "grading", "quad_order"}},
      {"weights", {"family", "gamma", "beta", "sigma", "p"}},
      {"problem", {"lambda", "m_cap", "potential_scale", "initial", "T"}},
      {"time", {"scheme", "dt", "safety"}},
      {"hardy", {"ladder", "multistart", "tol"}},
  };
  return s;
}

double as_double(const Section& sec, const std::string& section,
                 const std::string& key) {
  const auto& e = sec.at(key);
  try {
    size_t pos = 0;
    const double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    fail(e.line, "[" + section + "] " + key + ": not a number: '" + e.value +
                     "'");
  }
}

int as_int(const Section& sec, const std::string& section,
           const std::string& key) {
  const auto& e = sec.at(key);
  int v = 0;
  const auto* begin = e.value.data();
  const auto* end = begin + e.value.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end)
    fail(e.line, "[" + section + "] " + key + ": not an integer: '" + e.value +
                     "'");
  return v;
}

[[noreturn]] void bad_enum(const Section& sec, const std::string& section,
                           const std::string& key,
                           const std::string& allowed) {
  const auto& e = sec.at(key);
  fail(e.line, "[" + section + "] " + key + ": '" + e.value +
                   "' is not one of {" + allowed + "}");
}

void require_all(const Section& sec, const std::string& section, int line) {
  for (const auto& key : schema().at(section))
    if (!sec.count(key))
      fail(line, "[" + section + "] missing required key '" + key + "'");
}

std::vector<LadderRung> parse_ladder(const Section& sec) {
  const auto& e = sec.at("ladder");
  if (e.value == "default")
    return {{100, 1e-1, 10.0}, {200, 1e-2, 10.0}, {400, 1e-3, 10.0}};
  std::vector<LadderRung> ladder;
  std::istringstream rungs(e.value);
  std::string rung;
  while (std::getline(rungs, rung, ',')) {
    rung = trim(rung);
    std::istringstream parts(rung);
    std::string n_s, lo_s, hi_s, extra;
    if (!std::getline(parts, n_s, ':') || !std::getline(parts, lo_s, ':') ||
        !std::getline(parts, hi_s, ':') || std::getline(parts, extra, ':'))
      fail(e.line, "[hardy] ladder: rung '" + rung +
                       "' is not of the form n_cells:r_lo:r_hi");
    try {
      LadderRung r{std::stoi(n_s), std::stod(lo_s), std::stod(hi_s)};
      if (r.n_cells < 2 || !(r.r_lo < r.r_hi)) throw std::invalid_argument("");
      ladder.push_back(r);
    } catch (...) {
      fail(e.line, "[hardy] ladder: invalid rung '" + rung +
                       "' (need n_cells >= 2 and r_lo < r_hi)");
    }
  }
  if (ladder.empty()) fail(e.line, "[hardy] ladder: empty");
  return ladder;
}

}  // namespace

std::string to_string(WeightsFamily f) {
  switch (f) {
    case WeightsFamily::power: return "power";
    case WeightsFamily::confining: return "confining";
    case WeightsFamily::superharmonic: return "superharmonic";
    case WeightsFamily::identity: return "identity";
    default: return "expdecay";
  }
}

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::gaussian: return "gaussian";
    case InitialKind::hardy_minimizer: return "hardy-minimizer";
    default: return "random";
  }
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, Section> sections;
  std::map<std::string, int> section_line;

  std::istringstream in(text);
  std::string raw;
  std::string current;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (const auto hash = s.find('#'); hash != std::string::npos)
      s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header: " + s);
      current = trim(s.substr(1, s.size() - 2));
      if (!schema().count(current))
        fail(line, "unknown section [" + current + "]");
      if (sections.count(current))
        fail(line, "duplicate section [" + current + "]");
      sections[current];
      section_line[current] = line;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value': " + s);
    if (current.empty()) fail(line, "key outside any [section]: " + s);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!schema().at(current).count(key))
      fail(line, "unknown key '" + key + "' in section [" + current + "]");
    if (sections[current].count(key))
      fail(line, "duplicate key '" + key + "' in section [" + current + "]");
    sections[current][key] = {value, line};
  }

  RunConfig cfg;

  if (auto it = sections.find("domain"); it != sections.end()) {
    const Section& sec = it->second;
    require_all(sec, "domain", section_line["domain"]);
    DomainConfig d;
    d.r_lo = as_double(sec, "domain", "r_lo");
    d.r_hi = as_double(sec, "domain", "r_hi");
    d.dim_n = as_int(sec, "domain", "dim_n");
    const std::string& m = sec.at("measure").value;
    if (m == "radial")
      d.measure = Measure::radial;
    else if (m == "flat")
      d.measure = Measure::flat;
    else
      bad_enum(sec, "domain", "measure", "radial, flat");
    if (!(d.r_lo < d.r_hi))
      fail(sec.at("r_hi").line, "[domain] requires r_lo < r_hi");
    if (d.measure == Measure::radial && !(d.r_lo > 0.0))
      fail(sec.at("r_lo").line, "[domain] radial measure requires r_lo > 0");
    if (d.r_lo < 0.0) fail(sec.at("r_lo").line, "[domain] requires r_lo >= 0");
    if (d.measure == Measure::radial && d.dim_n < 2)
      fail(sec.at("dim_n").line, "[domain] radial measure requires dim_n >= 2");
    cfg.domain = d;
  }

  if (auto it = sections.find("discretization"); it != sections.end()) {
    const Section& sec = it->second;
    require_all(sec, "discretization", section_line["discretization"]);
    DiscretizationConfig d;
    d.n_cells = as_int(sec, "discretization", "n_cells");
    if (d.n_cells < 2)
      fail(sec.at("n_cells").line, "[discretization] n_cells must be >= 2");
    const std::string& g = sec.at("grading").value;
    if (g == "uniform")
      d.grading = Grading::uniform;
    else if (g == "geometric")
      d.grading = Grading::geometric;
    else
      bad_enum(sec, "discretization", "grading", "uniform, geometric");
    d.quad_order = as_int(sec, "discretization", "quad_order");
    if (d.quad_order < 1 || d.quad_order > 30)
      fail(sec.at("quad_order").line,
           "[discretization] quad_order must be in [1, 30]");
    cfg.discretization = d;
  }

  if (auto it = sections.find("weights"); it != sections.end()) {
    const Section& sec = it->second;
    require_all(sec, "weights", section_line["weights"]);
    WeightsConfig w;
    const std::string& f = sec.at("family").value;
    if (f == "power")
      w.family = WeightsFamily::power;
    else if (f == "confining")
      w.family = WeightsFamily::confining;
    else if (f == "superharmonic")
      w.family = WeightsFamily::superharmonic;
    else if (f == "identity")
      w.family = WeightsFamily::identity;
    else if (f == "expdecay")
      w.family = WeightsFamily::expdecay;
    else
      bad_enum(sec, "weights", "family",
               "power, confining, superharmonic, identity, expdecay");
    w.gamma = as_double(sec, "weights", "gamma");
    w.beta = as_double(sec, "weights", "beta");
    w.sigma = as_double(sec, "weights", "sigma");
    w.p = as_double(sec, "weights", "p");
    if (!(w.p >= 2.0))
      fail(sec.at("p").line, "[weights] requires p >= 2");
    cfg.weights = w;
  }

  if (auto it = sections.find("problem"); it != sections.end()) {
    const Section& sec = it->second;
    require_all(sec, "problem", section_line["problem"]);
    ProblemConfig p;
    p.lambda = as_double(sec, "problem", "lambda");
    if (p.lambda < 0.0)
      fail(sec.at("lambda").line, "[problem] requires lambda >= 0");
    p.m_cap = as_double(sec, "problem", "m_cap");
    if (!(p.m_cap > 0.0))
      fail(sec.at("m_cap").line, "[problem] requires m_cap > 0");
    p.potential_scale = as_double(sec, "problem", "potential_scale");
    if (!(p.potential_scale > 0.0 && p.potential_scale <= 1.0))
      fail(sec.at("potential_scale").line,
           "[problem] potential_scale must be in (0, 1]");
    const std::string& i = sec.at("initial").value;
    if (i == "gaussian")
      p.initial = InitialKind::gaussian;
    else if (i == "hardy-minimizer")
      p.initial = InitialKind::hardy_minimizer;
    else if (i == "random")
      p.initial = InitialKind::random;
    else
      bad_enum(sec, "problem", "initial", "gaussian, hardy-minimizer, random");
    p.T = as_double(sec, "problem", "T");
    if (p.T < 0.0) fail(sec.at("T").line, "[problem] requires T >= 0");
    cfg.problem = p;
  }

  if (auto it = sections.find("time"); it != sections.end()) {
    const Section& sec = it->second;
    require_all(sec, "time", section_line["time"]);
    TimeSection t;
    const std::string& sch = sec.at("scheme").value;
    if (sch == "rk2")
      t.scheme = TimeScheme::rk2;
    else if (sch == "backward_euler")
      t.scheme = TimeScheme::backward_euler;
    else
      bad_enum(sec, "time", "scheme", "rk2, backward_euler");
    t.dt = as_double(sec, "time", "dt");
    if (t.dt < 0.0) fail(sec.at("dt").line, "[time] requires dt >= 0");
    t.safety = as_double(sec, "time", "safety");
    if (!(t.safety > 0.0))
      fail(sec.at("safety").line, "[time] requires safety > 0");
    cfg.time = t;
  }

  if (auto it = sections.find("hardy"); it != sections.end()) {
    const Section& sec = it->second;
    require_all(sec, "hardy", section_line["hardy"]);
    HardySection h;
    h.ladder = parse_ladder(sec);
    h.multistart = as_int(sec, "hardy", "multistart");
    if (h.multistart < 1)
      fail(sec.at("multistart").line, "[hardy] multistart must be >= 1");
    h.tol = as_double(sec, "hardy", "tol");
    if (!(h.tol > 0.0)) fail(sec.at("tol").line, "[hardy] requires tol > 0");
    cfg.hardy = h;
  }

  // cross-section constraint: 2 <= p < N in the radial setting
  if (cfg.weights && cfg.domain && cfg.domain->measure == Measure::radial &&
      !(cfg.weights->p < cfg.domain->dim_n))
    throw ConfigError(
        "config error: [weights] p must satisfy 2 <= p < dim_n for the "
        "radial measure (got p=" +
        std::to_string(cfg.weights->p) +
        ", dim_n=" + std::to_string(cfg.domain->dim_n) + ")");

  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config error: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace hardylab
