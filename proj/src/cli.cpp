#include "padyn/cli.hpp"

#include <chrono>
#include <climits>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "padyn/flow.hpp"
#include "padyn/measure.hpp"
#include "padyn/orbits.hpp"
#include "padyn/parallel.hpp"
#include "padyn/surface.hpp"

namespace padyn {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Budget:
    case ErrorKind::PrecisionExhausted:
      return 3;
    case ErrorKind::InternalInvariant:
      return 4;
    default:
      return 2;
  }
}

namespace {

using u64 = std::uint64_t;

struct Options {
  unsigned workers = 1;
  std::string config;
  std::string out;
  bool timing = false;
  u64 max_points = 100000000;
  double max_seconds = 0;

  std::string map;
  std::string group;
  std::string monomial;
  std::string params;
  std::uint32_t p = 0;
  std::uint32_t pmin = 3;
  std::uint32_t pmax = 0;
  int level = 1;
  int walk_level = 0;
  int prec = 8;
  int rescale = 0;
  std::string point;
  std::string times = "1";
  int verify_points = 4;
  int verify_range = 10;
  std::string start;
  std::string mu = "1/3,1/3,1/3";
  u64 steps = 0;
  std::optional<u64> burn_in;
  u64 seed = 0;
  bool excise = false;
  std::size_t max_bits = 1 << 16;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

BigInt parse_big(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  if (t.empty() || t.find_first_not_of("+-0123456789") != std::string::npos) {
    fail(ErrorKind::Usage, what + ": expected an integer, got '" + s + "'");
  }
  return BigInt(t);
}

Rational parse_rational(const std::string& s, const std::string& what) {
  const auto parts = split(trim(s), '/');
  if (parts.size() == 1) return Rational(parse_big(parts[0], what));
  if (parts.size() != 2) fail(ErrorKind::Usage, what + ": expected a rational, got '" + s + "'");
  const BigInt d = parse_big(parts[1], what);
  if (d == 0) fail(ErrorKind::Usage, what + ": zero denominator");
  return Rational(parse_big(parts[0], what), d);
}

template <class T, class F>
std::vector<T> parse_list(const std::string& s, std::size_t n, const std::string& what, F f) {
  const auto parts = split(s, ',');
  if (n && parts.size() != n) fail(ErrorKind::Usage, what + ": expected " + std::to_string(n) + " comma-separated values");
  std::vector<T> out;
  for (const auto& x : parts) out.push_back(f(x, what));
  return out;
}

MarkovSurface parse_surface(const std::string& s) {
  if (s.empty()) fail(ErrorKind::Usage, "--params A,B,C,D is required");
  const auto v = parse_list<BigInt>(s, 4, "--params", parse_big);
  return {v[0], v[1], v[2], v[3]};
}

std::vector<std::uint32_t> prime_list(const Options& o) {
  if (o.p) {
    if (!is_prime(o.p)) fail(ErrorKind::Usage, std::to_string(o.p) + " is not prime");
    return {o.p};
  }
  if (!o.pmax) fail(ErrorKind::Usage, "give --p or --pmax");
  if (o.pmin > o.pmax) fail(ErrorKind::Usage, "--pmin exceeds --pmax");
  return primes_between(o.pmin, o.pmax);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// Stops work once a seconds budget is spent.
struct Deadline {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double limit = 0;
  void check() const {
    if (limit > 0 && std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() > limit) {
      fail(ErrorKind::Budget, "time budget of " + fixed(limit, 1) + " s exhausted");
    }
  }
};

std::string header(const CLI::App* sub, const std::string& name) {
  std::vector<const CLI::App*> chain;
  for (const CLI::App* a = sub; a; a = a->get_parent()) chain.insert(chain.begin(), a);
  std::ostringstream os;
  os << "# padyn " << name << "\n";
  for (const CLI::App* a : chain) {
    for (const CLI::Option* opt : a->get_options()) {
      if (opt->get_lnames().empty()) continue;
      const std::string n = opt->get_lnames().front();
      if (n == "help" || n == "out" || n == "workers" || n == "config") continue;
      std::string v;
      if (opt->get_expected_max() == 0) {
        v = opt->count() > 0 ? "true" : "false";
      } else if (opt->count() > 0) {
        for (const auto& r : opt->results()) v += (v.empty() ? "" : ",") + r;
      } else {
        v = opt->get_default_str();
      }
      os << "# " << n << "=" << v << "\n";
    }
  }
  return os.str();
}

u64 residue_of(const BigInt& v, u64 q) {
  BigInt r = v % q;
  if (r < 0) r += q;
  return static_cast<u64>(r);
}

std::vector<ResidueMap> maps_mod(const std::vector<PolyAuto>& gens, u64 q) {
  std::vector<ResidueMap> out;
  for (const auto& g : gens) out.push_back(residue_map(g, q));
  return out;
}

FinitePointSet spec_set(const MapSpec& spec, std::uint32_t p, int level, u64 cap) {
  if (spec.surface) return FinitePointSet::markov(*spec.surface, p, level, cap);
  const int dim = spec.generators.front().arity();
  if (pow(BigInt(p), level * dim) > BigInt(cap)) fail(ErrorKind::Budget, "point set exceeds --max-points");
  return FinitePointSet::affine(p, level, dim);
}

std::string cmd_orbits_scan(const Options& o) {
  const MapSpec spec = parse_map_spec(o.group);
  const auto primes = prime_list(o);
  Deadline dl{std::chrono::steady_clock::now(), o.max_seconds};
  const auto rows = parallel_map<ScanRow>(primes.size(), o.workers, [&](std::size_t i) {
    dl.check();
    const FinitePointSet set = spec_set(spec, primes[i], o.level, o.max_points);
    return scan_set(set, maps_mod(spec.generators, set.modulus()));
  });
  std::string s = scan_csv_header() + "\n";
  for (const auto& r : rows) s += format_scan_row(r, o.timing) + "\n";
  return s;
}

std::string cmd_orbits_ratio(const Options& o) {
  const MapSpec spec = parse_map_spec(o.map);
  if (spec.generators.size() != 1 || spec.surface) fail(ErrorKind::Usage, "ratio needs a single affine map");
  const PolyAuto& g = spec.generators.front();
  const auto primes = prime_list(o);
  Deadline dl{std::chrono::steady_clock::now(), o.max_seconds};
  const auto rows = parallel_map<ScanRow>(primes.size(), o.workers, [&](std::size_t i) {
    dl.check();
    if (pow(BigInt(primes[i]), o.level * g.arity()) > BigInt(o.max_points)) {
      fail(ErrorKind::Budget, "point set exceeds --max-points");
    }
    return scan_cyclic(g, primes[i], o.level);
  });
  std::string s = scan_csv_header() + "\n";
  for (const auto& r : rows) s += format_scan_row(r, o.timing) + "\n";
  return s;
}

std::string cmd_orbits_refine(const Options& o) {
  const MapSpec spec = parse_map_spec(o.group);
  if (!o.p) fail(ErrorKind::Usage, "refine needs --p");
  const FinitePointSet lo = spec_set(spec, o.p, o.level, o.max_points);
  const FinitePointSet hi = spec_set(spec, o.p, o.level + 1, o.max_points);
  const auto rows =
      refinement_probe(lo, maps_mod(spec.generators, lo.modulus()), hi, maps_mod(spec.generators, hi.modulus()));
  std::string s = "# is_full_preimage is heuristic evidence of a clopen closure, not a proof\n";
  s += refinement_csv_header() + "\n";
  for (const auto& r : rows) s += format_refinement_row(o.p, o.level, r) + "\n";
  return s;
}

std::string cmd_torus_orbits(const Options& o) {
  const MonomialSpec m = parse_monomial_spec(o.monomial);
  const auto primes = prime_list(o);
  const auto rows = parallel_map<ScanRow>(primes.size(), o.workers, [&](std::size_t i) {
    const FinitePointSet set = FinitePointSet::torus(primes[i], o.level);
    if (set.size() > o.max_points) fail(ErrorKind::Budget, "point set exceeds --max-points");
    const ResidueMap g = residue_map(m, primes[i], o.level);
    return scan_set(set, std::span<const ResidueMap>(&g, 1));
  });
  std::string s = scan_csv_header() + "\n";
  for (const auto& r : rows) s += format_scan_row(r, o.timing) + "\n";
  return s;
}

/// Verification of a flow on deterministic sample points: interpolation of
/// iterates for |n| <= range, the group law at random p-adic times, and the
/// contraction v(f^(p^j)(x) - x) >= c + j.
std::string flow_report(const FlowSeries& F, const IntPolyMap& f, const Options& o) {
  const int N = o.prec, m = F.dimension();
  const u64 qN = checked_power(o.p, N);
  u64 counter = 0;
  auto sample = [&](int digits) {
    return PadicInt::from_residue(counter_random(o.seed, counter++) % qN, o.p, digits, digits);
  };
  struct Row {
    std::string name;
    u64 cases = 0, failures = 0;
    std::string required;
    int min_digits = INT_MAX;
  };
  Row interp{"interpolation", 0, 0, std::to_string(N)}, group{"group_law", 0, 0, std::to_string(N)},
      contraction{"contraction", 0, 0, std::to_string(F.c)};
  int jmax = 0;
  while (jmax < 3 && checked_power(o.p, jmax + 1) <= 1000) ++jmax;
  const int wide = N + jmax + 2;
  const PointFn exact = point_fn(TateMap::from_int(f, o.p, N, m));
  const PointFn exact_wide = point_fn(TateMap::from_int(f, o.p, wide, m));
  for (int k = 0; k < o.verify_points; ++k) {
    PadicVector x;
    for (int i = 0; i < m; ++i) x.push_back(sample(N));
    PadicVector fwd = x, bwd = x;
    for (int n = 0; n <= o.verify_range; ++n) {
      for (const int t : n == 0 ? std::vector<int>{0} : std::vector<int>{n, -n}) {
        const PadicVector y = flow_eval(F, static_cast<std::int64_t>(t), x);
        const int got = std::min(vector_valuation_of_difference(y, t >= 0 ? fwd : bwd), precision_of(y));
        ++interp.cases;
        interp.failures += got < N;
        interp.min_digits = std::min(interp.min_digits, got);
      }
      fwd = exact(fwd);
      bwd = inverse_point(exact, bwd);
    }
    const PadicInt s = sample(N), t = sample(N);
    const PadicVector lhs = flow_eval(F, s + t, x), rhs = flow_eval(F, s, flow_eval(F, t, x));
    const int got = std::min({vector_valuation_of_difference(lhs, rhs), precision_of(lhs), precision_of(rhs)});
    ++group.cases;
    group.failures += got < N;
    group.min_digits = std::min(group.min_digits, got);
    PadicVector xw;
    for (const auto& c : x) xw.push_back(c.with_digits(wide));
    for (int j = 0; j <= jmax; ++j) {
      const int v = contraction_valuation(exact_wide, xw, j) - j;
      ++contraction.cases;
      contraction.failures += v < F.c;
      contraction.min_digits = std::min(contraction.min_digits, v);
    }
  }
  std::ostringstream os;
  os << "check,cases,failures,required_digits,min_digits\n";
  for (const Row& r : {interp, group, contraction}) {
    os << r.name << "," << r.cases << "," << r.failures << "," << r.required << ",";
    if (r.cases) os << r.min_digits;
    os << "\n";
  }
  return os.str();
}

std::string cmd_flow(const Options& o) {
  IntPolyMap f = parse_flow_map(o.map);
  if (!o.p || !is_prime(o.p)) fail(ErrorKind::Usage, "flow needs a prime --p");
  if (o.rescale > 0) f = rescale_int(f, o.p, o.rescale);
  const FlowSeries F = build_flow(f, o.p, o.prec);
  std::ostringstream os;
  os << "c=" << F.c << "\nK=" << F.K << "\nwork_digits=" << F.work_digits << "\ntail_valuation=" << F.tail_valuation()
     << "\ntheta:\n"
     << theta_field(F).to_text() << "\n";
  for (int k = 1; k < static_cast<int>(F.deltas.size()); ++k) os << "delta_" << k << ":\n" << F.deltas[k].to_text() << "\n";
  if (o.verify_points < 0 || o.verify_range < 0) fail(ErrorKind::Usage, "--verify-points and --verify-range must be nonnegative");
  os << flow_report(F, f, o) << "\n";
  if (!o.point.empty()) {
    const int m = F.dimension();
    const auto coords = parse_list<BigInt>(o.point, static_cast<std::size_t>(m), "--point", parse_big);
    PadicVector x;
    for (const auto& c : coords) x.push_back(PadicInt::from_big(c, o.p, o.prec));
    os << "t";
    for (int i = 0; i < m; ++i) os << ",x" << i + 1;
    os << ",precision\n";
    for (const auto& t : parse_list<BigInt>(o.times, 0, "--times", parse_big)) {
      const PadicVector y = flow_eval(F, PadicInt::from_big(t, o.p, F.work_digits), x);
      int prec = o.prec;
      os << t;
      for (const auto& c : y) {
        os << "," << c.residue();
        prec = std::min(prec, c.precision());
      }
      os << "," << prec << "\n";
    }
  }
  return os.str();
}

/// Start of a walk mod p^L: the given residues reduced to the report level and
/// lifted, or the first report-level point with a unit chart.
std::array<u64, 3> walk_start(const Options& o, const MarkovSurface& S, const FinitePointSet& set, int L) {
  u64 pt[3];
  if (!o.start.empty()) {
    const auto v = parse_list<BigInt>(o.start, 3, "--start", parse_big);
    for (int i = 0; i < 3; ++i) pt[i] = residue_of(v[i], set.modulus());
    if (set.index_of(pt) < 0) fail(ErrorKind::Usage, "--start is not on the surface mod p^level");
    return lift_surface_point(S, pt, set.prime(), set.level(), L);
  }
  for (u64 i = 0; i < set.size(); ++i) {
    set.point(i, pt);
    const auto v = chart_valuations(pt, S, set.prime(), 1);
    if (v[0] == 0 || v[1] == 0 || v[2] == 0) return lift_surface_point(S, pt, set.prime(), set.level(), L);
  }
  fail(ErrorKind::ChartSingular, "no surface point with a unit chart to start from");
}

std::vector<u64> orbit_containing(const OrbitPartition& part, u64 i) {
  std::vector<u64> out;
  for (u64 j = 0; j < part.size(); ++j)
    if (part.root(j) == part.root(i)) out.push_back(j);
  return out;
}

Distribution reference_on(const ResidueWeighting& w, const std::vector<u64>& support) {
  Distribution d{support, {}};
  for (const u64 i : support) d.mass.push_back(w.weight_of(i) / w.total);
  return d;
}

std::string measure_rows(const std::vector<u64>& support, const std::vector<std::string>& empirical,
                         const Distribution& ref) {
  std::string s = "residue_index,empirical_freq,reference_weight\n";
  for (std::size_t k = 0; k < support.size(); ++k) {
    s += std::to_string(support[k]) + "," + empirical[k] + "," + ref.mass[k].str() + "\n";
  }
  return s;
}

std::string cmd_markov_walk(const Options& o) {
  const MarkovSurface S = parse_surface(o.params);
  if (!o.p) fail(ErrorKind::Usage, "walk needs --p");
  const int L = o.walk_level ? o.walk_level : o.level + 2;
  if (L < o.level) fail(ErrorKind::Usage, "--walk-level must be at least --level");
  const FinitePointSet set = FinitePointSet::markov(S, o.p, o.level, o.max_points);
  WalkConfig cfg;
  const auto mu = parse_list<Rational>(o.mu, 3, "--mu", parse_rational);
  cfg.mu = {mu[0], mu[1], mu[2]};
  cfg.start = walk_start(o, S, set, L);
  cfg.start_level = L;
  cfg.steps = o.steps;
  cfg.burn_in = o.burn_in;
  cfg.seed = o.seed;
  const WalkResult w = random_walk(S, cfg, set);

  const auto gens = maps_mod({S.vieta(1), S.vieta(2), S.vieta(3)}, set.modulus());
  const OrbitPartition part = orbit_partition(set, gens);
  u64 red[3];
  for (int i = 0; i < 3; ++i) red[i] = cfg.start[i] % set.modulus();
  const auto orbit = orbit_containing(part, static_cast<u64>(set.index_of(red)));
  const ResidueWeighting ref = reference_measure(set, orbit, true);
  const Distribution refd = reference_on(ref, orbit);
  const Distribution emp = empirical_distribution(w, orbit);
  std::vector<std::string> freq;
  for (const u64 i : orbit) freq.push_back(fixed(static_cast<double>(w.counts[i]) / static_cast<double>(w.samples), 9));

  std::ostringstream os;
  os << "# walk_start=" << cfg.start[0] << "," << cfg.start[1] << "," << cfg.start[2] << " mod " << o.p << "^" << L << "\n"
     << "# burn_in=" << w.burn_in << (o.burn_in ? "" : " (default steps/10)") << "\n"
     << "# samples=" << w.samples << "\n"
     << "# orbit_size=" << orbit.size() << "\n"
     << "# excised=" << ref.excised.size() << "\n"
     << "# tv_distance=" << fixed(static_cast<double>(tv_distance(emp, refd)), 6) << "\n"
     << "# stationarity_defect=" << fixed(static_cast<double>(stationarity_defect(emp, set, gens, cfg.mu)), 6) << "\n";
  return os.str() + measure_rows(orbit, freq, refd);
}

std::string cmd_markov_measure(const Options& o) {
  const MarkovSurface S = parse_surface(o.params);
  if (!o.p) fail(ErrorKind::Usage, "measure needs --p");
  const FinitePointSet set = FinitePointSet::markov(S, o.p, o.level, o.max_points);
  const auto gens = maps_mod({S.vieta(1), S.vieta(2), S.vieta(3)}, set.modulus());
  std::vector<u64> support;
  if (!o.start.empty()) {
    const auto v = parse_list<BigInt>(o.start, 3, "--start", parse_big);
    u64 pt[3];
    for (int i = 0; i < 3; ++i) pt[i] = residue_of(v[i], set.modulus());
    const std::int64_t j = set.index_of(pt);
    if (j < 0) fail(ErrorKind::Usage, "--start is not on the surface mod p^level");
    support = orbit_containing(orbit_partition(set, gens), static_cast<u64>(j));
  } else {
    support.resize(set.size());
    for (u64 i = 0; i < set.size(); ++i) support[i] = i;
  }
  const ResidueWeighting w = reference_measure(set, support, o.excise);
  std::ostringstream os;
  os << "# residues=" << support.size() << "\n# excised=" << w.excised.size() << "\n";
  for (int i = 0; i < 3; ++i) {
    os << "# invariant_s" << i + 1 << "=" << (w.excised.empty() ? (pushforward_invariant(w, set, gens[i]) ? "yes" : "no") : "n/a")
       << "\n";
  }
  return os.str() + measure_rows(support, std::vector<std::string>(support.size()), reference_on(w, support));
}

std::string cmd_markov_escape(const Options& o) {
  const MarkovSurface S = parse_surface(o.params);
  if (!o.p) fail(ErrorKind::Usage, "escape needs --p");
  if (o.start.empty()) fail(ErrorKind::Usage, "escape needs --start x,y,z");
  const auto v = parse_list<Rational>(o.start, 3, "--start", parse_rational);
  const EscapeTrace tr = escape_test(S, {v[0], v[1], v[2]}, o.p, o.steps ? o.steps : 10, o.max_bits);
  std::ostringstream os;
  os << "# onset=" << (tr.onset ? std::to_string(*tr.onset) : "none") << "\n# bounded=" << (tr.bounded ? "yes" : "no")
     << "\nstep,min_valuation,x,y,z\n";
  for (std::size_t k = 0; k < tr.points.size(); ++k) {
    const int m = tr.min_valuation[k];
    os << k << "," << (m == kZeroValuation ? std::string("inf") : std::to_string(m));
    for (const auto& c : tr.points[k]) os << "," << c.str();
    os << "\n";
  }
  return os.str();
}

/// key=value lines, '#' comments.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Usage, "cannot read config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail(ErrorKind::Usage, path + ":" + std::to_string(n) + ": expected key=value");
    kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return kv;
}

bool flag_given(const std::vector<std::string>& args, const std::string& key) {
  const std::string f = "--" + key;
  for (const auto& a : args)
    if (a == f || a.rfind(f + "=", 0) == 0) return true;
  return false;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  Options o;
  if (const char* env = std::getenv("PADYN_WORKERS")) {
    try {
      o.workers = static_cast<unsigned>(std::stoul(env));
    } catch (...) {
      err << "PADYN_WORKERS must be a positive integer\n";
      return 2;
    }
  }

  CLI::App app{"p-adic dynamics experiments", "padyn"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--workers", o.workers, "worker threads (default from PADYN_WORKERS, else 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--config", o.config, "key=value file; flags take precedence");
  app.add_option("--out", o.out, "output file (default stdout)");
  app.add_flag("--timing", o.timing, "fill the seconds column");
  app.add_option("--max-points", o.max_points, "point budget per set");
  app.add_option("--max-seconds", o.max_seconds, "time budget for scans (0 = none)");

  auto* flow = app.add_subcommand("flow", "flow and vector field of a map congruent to the identity");
  flow->add_option("--map", o.map, "map spec")->required();
  flow->add_option("--p", o.p, "prime")->required();
  flow->add_option("--prec", o.prec, "target precision N");
  flow->add_option("--rescale", o.rescale, "apply x -> p^-r f(p^r x) first");
  flow->add_option("--point", o.point, "evaluate the flow at this integer point");
  flow->add_option("--times", o.times, "comma-separated integer times for --point");
  flow->add_option("--verify-points", o.verify_points, "sample points of the verification report");
  flow->add_option("--verify-range", o.verify_range, "largest |n| checked against iteration");
  flow->add_option("--seed", o.seed, "seed of the sample points");

  auto* orbits = app.add_subcommand("orbits", "orbit enumeration over Z/p^l");
  orbits->require_subcommand(1);
  auto* scan = orbits->add_subcommand("scan", "orbit counts of a group, one row per prime");
  auto* ratio = orbits->add_subcommand("ratio", "max orbit of one map divided by p ln p");
  auto* refine = orbits->add_subcommand("refine", "compare orbits at level l and l + 1");
  for (auto* s : {scan, refine}) s->add_option("--group", o.group, "map spec of the generators")->required();
  ratio->add_option("--map", o.map, "map spec of a single map")->required();
  for (auto* s : {scan, ratio, refine}) {
    s->add_option("--p", o.p, "single prime");
    s->add_option("--level", o.level, "level l");
  }
  for (auto* s : {scan, ratio}) {
    s->add_option("--pmin", o.pmin, "smallest prime");
    s->add_option("--pmax", o.pmax, "largest prime");
  }

  auto* markov = app.add_subcommand("markov", "Markov surface dynamics");
  markov->require_subcommand(1);
  auto* walk = markov->add_subcommand("walk", "random Vieta walk against the symplectic measure");
  auto* measure = markov->add_subcommand("measure", "normalized symplectic measure on residues");
  auto* escape = markov->add_subcommand("escape", "valuation trace of s1 o s2 from a rational point");
  for (auto* s : {walk, measure, escape}) {
    s->add_option("--params", o.params, "A,B,C,D")->required();
    s->add_option("--p", o.p, "prime")->required();
  }
  for (auto* s : {walk, measure}) s->add_option("--level", o.level, "report level l");
  walk->add_option("--walk-level", o.walk_level, "level L of the walk (default l + 2)");
  walk->add_option("--steps", o.steps, "step count M");
  walk->add_option("--burn-in", o.burn_in, "discarded steps (default M/10)");
  walk->add_option("--seed", o.seed, "seed");
  walk->add_option("--mu", o.mu, "weights of s1,s2,s3");
  for (auto* s : {walk, measure}) s->add_option("--start", o.start, "x,y,z mod p^l");
  measure->add_flag("--excise", o.excise, "drop ChartSingular residues instead of failing");
  escape->add_option("--start", o.start, "x,y,z as rationals")->required();
  escape->add_option("--steps", o.steps, "iterations (default 10)");
  escape->add_option("--max-bits", o.max_bits, "bit budget per coordinate");

  auto* torus = app.add_subcommand("torus", "monomial maps on unit tori");
  torus->require_subcommand(1);
  auto* torus_orbits = torus->add_subcommand("orbits", "orbit counts of a monomial map");
  torus_orbits->add_option("--monomial", o.monomial, "monomial:a,b,c,d[@alpha,beta]")->required();
  torus_orbits->add_option("--p", o.p, "single prime");
  torus_orbits->add_option("--pmin", o.pmin, "smallest prime");
  torus_orbits->add_option("--pmax", o.pmax, "largest prime");
  torus_orbits->add_option("--level", o.level, "level l");

  // Config values become flags appended after the subcommand, unless given explicitly.
  std::vector<std::string> args = raw_args;
  for (std::size_t i = 0; i + 1 < raw_args.size(); ++i) {
    if (raw_args[i] == "--config") o.config = raw_args[i + 1];
  }
  for (const auto& a : raw_args) {
    if (a.rfind("--config=", 0) == 0) o.config = a.substr(9);
  }
  try {
    if (!o.config.empty()) {
      for (const auto& [k, v] : read_config(o.config)) {
        if (k == "config" || flag_given(raw_args, k)) continue;
        args.push_back("--" + k + "=" + v);
      }
    }
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code(e.kind());
  }

  try {
    std::vector<const char*> argv{"padyn"};
    for (const auto& a : args) argv.push_back(a.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  struct Command {
    CLI::App* sub;
    const char* name;
    std::string (*run)(const Options&);
  };
  const Command commands[] = {{flow, "flow", cmd_flow},
                              {scan, "orbits scan", cmd_orbits_scan},
                              {ratio, "orbits ratio", cmd_orbits_ratio},
                              {refine, "orbits refine", cmd_orbits_refine},
                              {walk, "markov walk", cmd_markov_walk},
                              {measure, "markov measure", cmd_markov_measure},
                              {escape, "markov escape", cmd_markov_escape},
                              {torus_orbits, "torus orbits", cmd_torus_orbits}};
  try {
    for (const auto& c : commands) {
      if (!c.sub->parsed()) continue;
      const std::string body = header(c.sub, c.name) + c.run(o);
      if (o.out.empty()) {
        out << body;
      } else {
        std::ofstream f(o.out, std::ios::binary);
        if (!f) fail(ErrorKind::Usage, "cannot write " + o.out);
        f << body;
        if (!f) fail(ErrorKind::Usage, "failed writing " + o.out);
      }
      return 0;
    }
    err << "usage error: no command\n";
    return 2;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace padyn
