#pragma once

// Grid scans behind the command-line tool. Every scan produces a Table whose rows are
// computed by a pool of workers and emitted in grid order as CSV or JSON.

#include "ressf/cantor.hpp"
#include "ressf/io.hpp"
#include "ressf/random_model.hpp"

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <thread>
#include <variant>

namespace ressf {

inline constexpr std::string_view tool_version = "0.1.0";

using Cell = std::variant<std::monostate, long long, double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  std::vector<std::pair<std::string, Cell>> summary;
  bool failed = false;  // a check in the table failed (selftest)
};

/// Ordered parallel map: out[i] = fn(i), independent of completion order.
template <typename R, typename Fn>
std::vector<R> parallel_map(std::size_t n, int workers, Fn&& fn) {
  std::vector<R> out(n);
  const auto count = static_cast<std::size_t>(std::max(1, workers));
  if (count == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(count, n); ++w)
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            out[i] = fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

/// Worker count from RESSF_WORKERS, else 1.
inline int default_workers() {
  if (const char* env = std::getenv("RESSF_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  return 1;
}

struct ScanConfig {
  std::string command;
  std::string model_path;
  std::optional<double> lambda_min;
  std::optional<double> lambda_max;
  int lambda_count = 1;
  std::optional<std::pair<double, double>> interval;
  std::optional<double> y0;
  int depth = 4;
  int nodes = 64;
  int samples = 0;  // 0: command default
  bool large_coupling = false;
  std::string format = "csv";
  std::string out;
  std::uint64_t seed = 42;
  int workers = 1;

  void validate() const {
    if (lambda_count < 1) throw Error(ErrorCode::InvalidInput, "--lambda-count must be at least 1");
    if (lambda_min.has_value() != lambda_max.has_value())
      throw Error(ErrorCode::InvalidInput, "--lambda-min and --lambda-max go together");
    if (lambda_min && !(*lambda_min <= *lambda_max)) throw Error(ErrorCode::InvalidInput, "--lambda-min exceeds --lambda-max");
    if (interval && !(interval->first < interval->second)) throw Error(ErrorCode::InvalidInput, "--interval needs a < b");
    if (y0 && !(*y0 > 0.0)) throw Error(ErrorCode::InvalidInput, "--y0 must be positive");
    if (depth < 1) throw Error(ErrorCode::InvalidInput, "--depth must be at least 1");
    if (nodes < 2) throw Error(ErrorCode::InvalidInput, "--nodes must be at least 2");
    if (samples < 0) throw Error(ErrorCode::InvalidInput, "--samples must be non-negative");
    if (format != "csv" && format != "json") throw Error(ErrorCode::InvalidInput, "--format must be csv or json");
    if (workers < 1) throw Error(ErrorCode::InvalidInput, "--workers must be at least 1");
  }
};

namespace detail {

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", x);
  return buf;
}

inline std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ";" : "") + format_double(xs[i]);
  return s;
}

inline std::string join(const std::vector<int>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ";" : "") + std::to_string(xs[i]);
  return s;
}

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string csv_cell(const Cell& c) {
  if (std::holds_alternative<std::monostate>(c)) return "";
  if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

inline nlohmann::ordered_json json_cell(const Cell& c) {
  using J = nlohmann::ordered_json;
  if (std::holds_alternative<std::monostate>(c)) return nullptr;
  if (const auto* i = std::get_if<long long>(&c)) return *i;
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? J(*d) : J(format_double(*d));
  return std::get<std::string>(c);
}

inline Cell opt_cell(const std::optional<double>& x) { return x ? Cell(*x) : Cell(); }

/// Error columns for a failed row.
struct RowStatus {
  std::string status = "ok";
  std::string code;
  std::string detail;

  static RowStatus from(const Error& e) { return {"error", std::string(to_string(e.code())), e.what()}; }
};

}  // namespace detail

/// Hash of everything that determines the output bytes (worker count and paths excluded,
/// model file contents included).
inline std::string config_hash(const ScanConfig& c) {
  std::ostringstream s;
  s << "command=" << c.command << ";model=" << (c.model_path.empty() ? "" : detail::read_file(c.model_path))
    << ";lambda=" << (c.lambda_min ? detail::format_double(*c.lambda_min) : "") << ","
    << (c.lambda_max ? detail::format_double(*c.lambda_max) : "") << "," << c.lambda_count << ";interval="
    << (c.interval ? detail::format_double(c.interval->first) + "," + detail::format_double(c.interval->second) : "")
    << ";y0=" << (c.y0 ? detail::format_double(*c.y0) : "") << ";depth=" << c.depth << ";nodes=" << c.nodes
    << ";samples=" << c.samples << ";large=" << c.large_coupling << ";format=" << c.format << ";seed=" << c.seed;
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(detail::fnv1a(s.str())));
  return buf;
}

inline std::vector<double> lambda_grid(const ScanConfig& c, const std::optional<double>& fallback) {
  if (c.lambda_min) {
    std::vector<double> out;
    const int n = c.lambda_count;
    for (int i = 0; i < n; ++i)
      out.push_back(n == 1 ? *c.lambda_min : *c.lambda_min + (*c.lambda_max - *c.lambda_min) * i / (n - 1));
    return out;
  }
  if (fallback) return {*fallback};
  throw Error(ErrorCode::InvalidInput, "no lambda given: use --lambda-min/--lambda-max or a \"lambda\" in the model");
}

inline std::pair<double, double> scan_interval(const ScanConfig& c, const ModelFile& mf) {
  if (c.interval) return *c.interval;
  if (mf.interval) return *mf.interval;
  throw Error(ErrorCode::InvalidInput, "no interval given: use --interval or an \"interval\" in the model");
}

/// Per lambda: resonance points in [a, b] with N+, N-, index and residue check.
inline Table run_index(const ScanConfig& c) {
  const ModelFile mf = load_model(c.model_path);
  const auto [a, b] = scan_interval(c, mf);
  const std::vector<double> grid = lambda_grid(c, mf.lambda);
  const IndexOptions opt{.y0 = c.y0.value_or(0.0)};
  const PoleOptions pole_defaults{};
  Table t;
  t.columns = {"lambda", "a", "b", "resonance_points", "multiplicities", "n_plus", "n_minus", "index",
               "residue_check_re", "residue_check_im", "y0", "y_used", "halvings", "cluster_rel_gap",
               "stable_required", "status", "error", "detail"};
  t.rows = parallel_map<std::vector<Cell>>(grid.size(), c.workers, [&](std::size_t i) {
    const double lambda = grid[i];
    std::vector<double> pts, res_re, res_im, y0s, ys;
    std::vector<int> mult, np, nm, idx, halv;
    detail::RowStatus st;
    try {
      for (const auto& p : resonance_points(mf.model, lambda, a, b)) {
        const ResonanceIndexResult r = resonance_index(mf.model, lambda, p.r0, opt);
        pts.push_back(p.r0);
        mult.push_back(r.multiplicity);
        np.push_back(r.n_plus);
        nm.push_back(r.n_minus);
        idx.push_back(r.index);
        res_re.push_back(r.residue_check.real());
        res_im.push_back(r.residue_check.imag());
        y0s.push_back(r.y0);
        ys.push_back(r.y_used);
        halv.push_back(r.halvings);
      }
    } catch (const Error& e) {
      st = detail::RowStatus::from(e);
    }
    return std::vector<Cell>{lambda, a, b, detail::join(pts), detail::join(mult), detail::join(np), detail::join(nm),
                             detail::join(idx), detail::join(res_re), detail::join(res_im), detail::join(y0s),
                             detail::join(ys), detail::join(halv), pole_defaults.cluster_rel_gap,
                             static_cast<long long>(opt.stable_required), st.status, st.code, st.detail};
  });
  return t;
}

/// Per lambda: xi, xi_a, xi_s and the jumps; endpoints resonant at lambda are pushed
/// outwards in steps of 1e-3 (b - a) and the nudge is recorded.
inline Table run_ssf(const ScanConfig& c) {
  const ModelFile mf = load_model(c.model_path);
  const auto [a, b] = scan_interval(c, mf);
  const std::vector<double> grid = lambda_grid(c, mf.lambda);
  SsfOptions opt;
  opt.y0 = c.y0.value_or(0.0);
  Table t;
  t.columns = {"lambda", "a", "b", "a_used", "b_used", "nudged", "xi", "xi_a", "xi_s", "jump_points", "jumps",
               "indices", "jump_residual_max", "y_extrapolation_error", "y0", "levels", "agreement_tol",
               "richardson_order"};
  if (c.large_coupling)
    for (const char* col : {"lc_xi", "lc_signature", "lc_converged", "lc_index_sum", "lc_R"}) t.columns.push_back(col);
  for (const char* col : {"status", "error", "detail"}) t.columns.push_back(col);
  t.rows = parallel_map<std::vector<Cell>>(grid.size(), c.workers, [&](std::size_t i) {
    const double lambda = grid[i];
    double lo = a, hi = b;
    std::string nudged;
    const double step = 1e-3 * (b - a);
    for (int k = 0; k < 10 && !is_regular_point(mf.model, lo, lambda); ++k) lo -= step;
    for (int k = 0; k < 10 && !is_regular_point(mf.model, hi, lambda); ++k) hi += step;
    if (lo != a) nudged += "a";
    if (hi != b) nudged += nudged.empty() ? "b" : ";b";
    std::vector<Cell> row{lambda, a, b, lo, hi, nudged};
    detail::RowStatus st;
    try {
      const SsfDecomposition d = ssf_decompose(mf.model, lambda, lo, hi, opt);
      std::vector<double> pts;
      std::vector<int> jumps, idx;
      double worst = 0.0;
      for (const auto& j : d.jumps) {
        pts.push_back(j.r0);
        jumps.push_back(j.jump);
        idx.push_back(j.index);
        worst = std::max(worst, j.residual);
      }
      for (Cell x : {Cell(d.xi), Cell(d.xi_a), Cell(d.xi_s), Cell(detail::join(pts)), Cell(detail::join(jumps)),
                     Cell(detail::join(idx)), Cell(worst), Cell(d.y_extrapolation_error), Cell(d.y0),
                     Cell(static_cast<long long>(d.levels)), Cell(opt.extrapolation.agreement_tol),
                     Cell(static_cast<long long>(opt.extrapolation.order))})
        row.push_back(x);
      if (c.large_coupling) {
        const LargeCouplingResult lc = large_coupling_limit(mf.model, lambda, default_coupling_schedule(mf.model), opt);
        for (Cell x : {Cell(lc.xi_limit), Cell(static_cast<long long>(lc.signature)),
                       Cell(static_cast<long long>(lc.converged)), Cell(static_cast<long long>(lc.index_sum)),
                       Cell(lc.radii.empty() ? NAN : lc.radii.back())})
          row.push_back(x);
      }
    } catch (const Error& e) {
      st = detail::RowStatus::from(e);
    }
    row.resize(t.columns.size() - 3);
    row.push_back(st.status);
    row.push_back(st.code);
    row.push_back(st.detail);
    return row;
  });
  return t;
}

/// Index of the discretised fat-Cantor model at samples of K_depth (or at the given
/// lambda grid), with a summary of the index and coupling-sign fractions.
inline Table run_cantor(const ScanConfig& c) {
  const FatCantorSet set = build_svc(c.depth);
  const CantorModel model = discretize(set, c.nodes);
  const double y = c.y0.value_or(1e-4);
  const std::vector<double> grid = c.lambda_min ? lambda_grid(c, std::nullopt) : sample_kept(set, c.samples > 0 ? c.samples : 100);
  Table t;
  t.columns = {"lambda", "pv_integral", "r0_closed_form", "r0_tracked", "index", "depth", "y", "nodes_per_interval",
               "n_plus", "n_minus", "r0_at_y", "tracking_levels", "guard", "status", "error", "detail"};
  const double guard = default_guard(set);
  struct Out {
    std::vector<Cell> row;
    bool valid = false;
    bool plus = false;
    bool positive = false;
  };
  const auto outs = parallel_map<Out>(grid.size(), c.workers, [&](std::size_t i) {
    Out o;
    const double lambda = grid[i];
    detail::RowStatus st;
    CantorRow r;
    r.lambda = lambda;
    try {
      r = index_at(model, lambda, y);
      if (!r.error.empty()) st = {"flagged", r.error, "p.v. integral vanishes: no finite resonance point"};
    } catch (const Error& e) {
      st = detail::RowStatus::from(e);
    }
    const bool ok = st.status == "ok";
    o.valid = ok;
    o.plus = ok && r.index == 1;
    o.positive = ok && r.r0_closed_form && *r.r0_closed_form > 0.0;
    o.row = {lambda,
             st.status == "error" ? Cell() : Cell(r.pv),
             detail::opt_cell(r.r0_closed_form),
             ok ? Cell(r.r0_tracked) : Cell(),
             ok ? Cell(static_cast<long long>(r.index)) : Cell(),
             static_cast<long long>(c.depth),
             y,
             static_cast<long long>(c.nodes),
             ok ? Cell(static_cast<long long>(r.n_plus)) : Cell(),
             ok ? Cell(static_cast<long long>(r.n_minus)) : Cell(),
             ok ? Cell(r.r0_at_y) : Cell(),
             ok ? Cell(static_cast<long long>(r.tracking_levels)) : Cell(),
             guard,
             st.status,
             st.code,
             st.detail};
    return o;
  });
  long long valid = 0, plus = 0, positive = 0;
  for (const auto& o : outs) {
    t.rows.push_back(o.row);
    valid += o.valid;
    plus += o.plus;
    positive += o.positive;
  }
  t.summary = {{"samples", static_cast<long long>(grid.size())},
               {"valid_samples", valid},
               {"index_plus_fraction", valid ? static_cast<double>(plus) / valid : NAN},
               {"positive_r0_fraction", valid ? static_cast<double>(positive) / valid : NAN},
               {"depth", static_cast<long long>(c.depth)},
               {"removed_length", set.removed_length}};
  return t;
}

/// Oracle agreement on seeded random models: residues against R V multiplicities,
/// Krein half-plane counts, flow against index, jumps against index, xi against the
/// counting functions, and the two trace formulas against each other.
inline Table run_selftest(const ScanConfig& c) {
  const int cases = c.samples > 0 ? c.samples : 20;
  Table t;
  t.columns = {"case", "dim", "rank", "lambda", "a", "b", "resonance_points", "residue_max_error", "krein_ok",
               "flow_matches_index", "jumps_match_index", "xi_matches_count", "xi_s_minus_jumps",
               "dual_formula_max_error", "pass", "status", "error", "detail"};
  struct Out {
    std::vector<Cell> row;
    bool pass = false;
  };
  const auto outs = parallel_map<Out>(static_cast<std::size_t>(cases), c.workers, [&](std::size_t i) {
    Rng rng(detail::splitmix(c.seed * 0x100000001b3ULL + i));
    const RandomCase rc = random_case(rng);
    const FramedModel& m = rc.model;
    Out o;
    detail::RowStatus st;
    double residue_err = 0.0, dual_err = 0.0, xi_gap = NAN;
    bool krein = true, flow = true, jumps = true, count = true;
    long long npts = 0;
    try {
      for (double y : {0.1, 0.01}) {
        const SpectralParameter z{rc.lambda, y};
        const TraceFunction tf = trace_function(m, z);
        for (cplx p : tf.poles()) {
          const cplx res = residue_at(tf, p, isolation_radius(tf, p));
          const int want = oracles::rv_multiplicity_difference(m.h0(), m.v(), z, p);
          residue_err = std::max(residue_err, std::abs(two_pi_i * res - static_cast<double>(want)));
        }
        const auto hp = oracles::halfplane_counts(m.h0(), m.v(), z);
        const auto sig = signature(m.v());
        krein = krein && hp.n_plus == sig.n_positive && hp.n_minus == sig.n_negative && hp.n_real_nonzero == 0;
      }
      const SsfDecomposition d = ssf_decompose(m, rc.lambda, rc.a, rc.b);
      const oracles::FlowRecord fr = oracles::spectral_flow(m, rc.lambda, rc.a, rc.b);
      for (const auto& j : d.jumps) {
        ++npts;
        jumps = jumps && j.jump == j.index;
        flow = flow && fr.net_at(j.r0, 1e-6 * std::max(1.0, std::abs(j.r0))) == j.index;
      }
      xi_gap = std::abs(d.xi_s - d.jump_sum());
      count = std::lround(d.xi) == oracles::counting_xi(path_at(m, rc.a), path_at(m, rc.b), rc.lambda);
      const SpectralParameter z{rc.lambda, 0.05};
      for (int k = 0; k < 20; ++k) {
        const double s = rc.a + (rc.b - rc.a) * (k + 0.5) / 20.0;
        const cplx direct = f_trace(m, s, z, TraceMethod::Direct);
        dual_err = std::max({dual_err, std::abs(direct - f_trace(m, s, z, TraceMethod::Meromorphic)),
                             std::abs(direct - f_trace(m, s, z, TraceMethod::MeromorphicInverse))});
      }
    } catch (const Error& e) {
      st = detail::RowStatus::from(e);
    }
    o.pass = st.status == "ok" && residue_err < 1e-6 && krein && flow && jumps && count && xi_gap < 1e-6 &&
             dual_err < 1e-9;
    o.row = {static_cast<long long>(i), static_cast<long long>(m.dim()), static_cast<long long>(rc.rank), rc.lambda,
             rc.a, rc.b, npts, residue_err, static_cast<long long>(krein), static_cast<long long>(flow),
             static_cast<long long>(jumps), static_cast<long long>(count), xi_gap, dual_err,
             static_cast<long long>(o.pass), st.status, st.code, st.detail};
    return o;
  });
  long long passed = 0;
  for (const auto& o : outs) {
    t.rows.push_back(o.row);
    passed += o.pass;
  }
  t.failed = passed != cases;
  t.summary = {{"cases", static_cast<long long>(cases)},
               {"passed", passed},
               {"seed", static_cast<long long>(c.seed)}};
  return t;
}

inline void write_csv(std::ostream& os, const Table& t, const ScanConfig& c) {
  os << "# ressf " << tool_version << " csv-v1 command=" << c.command << " config=" << config_hash(c) << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << detail::csv_cell(row[i]);
    os << "\n";
  }
  if (!t.summary.empty()) {
    os << "# summary";
    for (const auto& [k, v] : t.summary) os << " " << k << "=" << detail::csv_cell(v);
    os << "\n";
  }
}

inline void write_json(std::ostream& os, const Table& t, const ScanConfig& c) {
  nlohmann::ordered_json doc;
  doc["tool"] = "ressf";
  doc["version"] = std::string(tool_version);
  doc["schema"] = "json-v1";
  doc["command"] = c.command;
  doc["config"] = config_hash(c);
  doc["columns"] = t.columns;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json r;
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = detail::json_cell(row[i]);
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  if (!t.summary.empty()) {
    nlohmann::ordered_json s;
    for (const auto& [k, v] : t.summary) s[k] = detail::json_cell(v);
    doc["summary"] = std::move(s);
  }
  os << doc.dump(2) << "\n";
}

inline Table run_scan(const ScanConfig& c) {
  c.validate();
  if (c.command == "index") return run_index(c);
  if (c.command == "ssf") return run_ssf(c);
  if (c.command == "cantor") return run_cantor(c);
  if (c.command == "selftest") return run_selftest(c);
  throw Error(ErrorCode::InvalidInput, "unknown command " + c.command);
}

inline void write_table(std::ostream& os, const Table& t, const ScanConfig& c) {
  if (c.format == "json") write_json(os, t, c);
  else write_csv(os, t, c);
}

}  // namespace ressf
