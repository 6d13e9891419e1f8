#include "dnls/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "dnls/asymptotics.hpp"
#include "dnls/b_path.hpp"
#include "dnls/diagnostics.hpp"
#include "dnls/errors.hpp"
#include "dnls/linearized.hpp"
#include "dnls/profile_core.hpp"

namespace dnls::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Config

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void RunConfig::validate() const {
  solver.validate();
  auto bad = [](const std::string& what) { throw Error(ErrorKind::Config, what); };
  if (!std::isfinite(a0) || !std::isfinite(a1)) bad("a0 and a1 must be finite");
  if (!(y_max > 0.0) || !std::isfinite(y_max)) bad("y_max must be positive and finite");
  if (!(fit_lo > 0.0) || !(fit_hi > fit_lo)) bad("fit window must satisfy 0 < fit_lo < fit_hi");
  if (!(grid_step > 0.0) || !std::isfinite(grid_step)) bad("grid_step must be positive");
  if (!std::isfinite(phi0)) bad("phi0 must be finite");
  if (output_dir.empty()) bad("output_dir must not be empty");
}

namespace {

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw Error(ErrorKind::Config, "bad number for " + key + ": '" + text + "'");
  }
  return v;
}

std::size_t parse_size(const std::string& key, const std::string& text) {
  std::size_t v = 0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last) {
    throw Error(ErrorKind::Config, "bad integer for " + key + ": '" + text + "'");
  }
  return v;
}

#define DNLS_REAL_FIELD(name, member)                                              \
  Field {                                                                          \
    name, [](const RunConfig& c) { return format_double(c.member); },              \
        [](RunConfig& c, const std::string& v) { c.member = parse_double(name, v); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> f{
      DNLS_REAL_FIELD("a0", a0),
      DNLS_REAL_FIELD("a1", a1),
      DNLS_REAL_FIELD("y_max", y_max),
      DNLS_REAL_FIELD("rel_tol", solver.rel_tol),
      DNLS_REAL_FIELD("abs_tol", solver.abs_tol),
      DNLS_REAL_FIELD("max_step", solver.max_step),
      DNLS_REAL_FIELD("blowup_threshold", solver.blowup_threshold),
      DNLS_REAL_FIELD("min_step", solver.min_step),
      Field{"max_samples", [](const RunConfig& c) { return std::to_string(c.solver.max_samples); },
            [](RunConfig& c, const std::string& v) {
              c.solver.max_samples = parse_size("max_samples", v);
            }},
      DNLS_REAL_FIELD("fit_lo", fit_lo),
      DNLS_REAL_FIELD("fit_hi", fit_hi),
      DNLS_REAL_FIELD("grid_step", grid_step),
      DNLS_REAL_FIELD("phi0", phi0),
      Field{"output_dir", [](const RunConfig& c) { return c.output_dir; },
            [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
  };
  return f;
}

#undef DNLS_REAL_FIELD

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string serialize(const RunConfig& cfg) {
  std::string out;
  for (const auto& f : fields()) out += std::string(f.key) + " = " + f.get(cfg) + "\n";
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::map<std::string, bool> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Config, "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& fs_ = fields();
    const auto it = std::find_if(fs_.begin(), fs_.end(), [&](const Field& f) { return key == f.key; });
    if (it == fs_.end()) throw Error(ErrorKind::Config, "unknown key '" + key + "'");
    if (seen[key]) throw Error(ErrorKind::Config, "duplicate key '" + key + "'");
    seen[key] = true;
    it->set(cfg, value);
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_hash(const RunConfig& cfg) {
  RunConfig keyed = cfg;
  keyed.output_dir.clear();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : serialize(keyed)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

unsigned sweep_threads() {
  if (const char* env = std::getenv("DNLS_PROFILE_THREADS")) {
    unsigned v = 0;
    const auto res = std::from_chars(env, env + std::char_traits<char>::length(env), v);
    if (res.ec == std::errc() && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// Output helpers

namespace {

ordered_json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json config_json(const RunConfig& cfg) {
  ordered_json j;
  j["a0"] = cfg.a0;
  j["a1"] = cfg.a1;
  j["y_max"] = cfg.y_max;
  j["rel_tol"] = cfg.solver.rel_tol;
  j["abs_tol"] = cfg.solver.abs_tol;
  j["max_step"] = cfg.solver.max_step;
  j["blowup_threshold"] = cfg.solver.blowup_threshold;
  j["min_step"] = cfg.solver.min_step;
  j["max_samples"] = cfg.solver.max_samples;
  j["fit_lo"] = cfg.fit_lo;
  j["fit_hi"] = cfg.fit_hi;
  j["grid_step"] = cfg.grid_step;
  j["phi0"] = cfg.phi0;
  return j;
}

ordered_json metadata(const RunConfig& cfg) {
  ordered_json j;
  j["tool_version"] = kToolVersion;
  j["config_hash"] = config_hash(cfg);
  return j;
}

// A table: header + rows of optional numbers (empty = undefined).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;

  std::string csv() const {
    std::string s;
    for (std::size_t c = 0; c < columns.size(); ++c) s += (c ? "," : "") + columns[c];
    s += "\n";
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) {
        if (c) s += ",";
        if (r[c]) s += format_double(*r[c]);
      }
      s += "\n";
    }
    return s;
  }

  ordered_json json() const {
    ordered_json j;
    j["columns"] = columns;
    ordered_json rs = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json row = ordered_json::array();
      for (const auto& v : r) row.push_back(v ? num(*v) : ordered_json(nullptr));
      rs.push_back(std::move(row));
    }
    j["rows"] = std::move(rs);
    return j;
  }
};

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void text(const std::string& name, const std::string& content) {
    const fs::path p = dir_ / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    out << content;
    if (!out) throw Error(ErrorKind::Config, "cannot write " + p.string());
    written_.push_back(name);
  }

  void json(const std::string& name, const ordered_json& j) { text(name, j.dump(2) + "\n"); }

  void table(const std::string& stem, const Table& t, Format f) {
    if (f == Format::Csv) {
      text(stem + ".csv", t.csv());
    } else {
      json(stem + ".json", t.json());
    }
  }

  // Compares everything written so far against `ref`; returns false on any
  // mismatch and lists them on `out`.
  bool compare(const fs::path& ref, std::ostream& out) const {
    bool ok = true;
    for (const auto& name : written_) {
      const auto res = compare_files(dir_ / name, ref / name);
      for (const auto& m : res.mismatches) {
        out << "compare " << name << ": " << m << "\n";
        ok = false;
      }
    }
    if (ok) out << "compare: " << written_.size() << " files match " << ref.string() << "\n";
    return ok;
  }

 private:
  fs::path dir_;
  std::vector<std::string> written_;
};

int finish(const Writer& w, const Options& opt, std::ostream& out, int status) {
  if (!opt.compare_dir.empty() && !w.compare(opt.compare_dir, out)) return status ? status : 3;
  return status;
}

ordered_json error_record(const Error& e) {
  ordered_json j;
  j["error"] = std::string(to_string(e.kind()));
  j["message"] = e.what();
  return j;
}

// Guards a command body: dnls::Error becomes a JSON error record and exit 2.
int guarded(const RunConfig* cfg, std::ostream& out, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    ordered_json rec = error_record(e);
    if (cfg) {
      try {
        Writer w(cfg->output_dir);
        w.json("error.json", rec);
      } catch (...) {
      }
    }
    out << rec.dump() << "\n";
    return 2;
  }
}

ordered_json side_json(const Trajectory& t) {
  ordered_json j;
  j["termination"] = to_string(t.termination());
  j["y_reached"] = t.y_reached();
  j["peak_magnitude"] = t.peak_magnitude();
  j["blowup"] = t.termination() == Termination::Blowup;
  j["blowup_location"] =
      t.termination() == Termination::Blowup ? ordered_json(t.y_reached()) : ordered_json(nullptr);
  return j;
}

ordered_json decay_json(const DecayReport& d) {
  ordered_json j;
  j["sup_weighted_a"] = d.sup_weighted_a;
  j["sup_weighted_da"] = d.sup_weighted_da;
  j["c3_a"] = d.c3_a;
  j["c3_da"] = d.c3_da;
  return j;
}

// Integer grid k * step so that y = 0 and the ±y rows line up exactly.
std::vector<double> row_grid(const Profile& pr, double step) {
  const double lo = pr.negative().y_reached(), hi = pr.positive().y_reached();
  const auto kneg = static_cast<long long>(std::floor(-lo / step * (1.0 + 1e-14)));
  const auto kpos = static_cast<long long>(std::floor(hi / step * (1.0 + 1e-14)));
  std::vector<double> ys;
  for (long long k = -kneg; k <= kpos; ++k) {
    const double y = static_cast<double>(k) * step;
    if (pr.covers(y)) ys.push_back(y);
  }
  return ys;
}

}  // namespace

// ---------------------------------------------------------------------------
// solve

int cmd_solve(const RunConfig& cfg, const Options& opt, std::ostream& out) {
  return guarded(&cfg, out, [&] {
    cfg.validate();
    const InitialData init{cfg.a0, cfg.a1};
    const Profile pr = Profile::solve(init, cfg.y_max, cfg.solver, cfg.phi0);
    Writer w(cfg.output_dir);

    Table traj{{"y", "A", "dA", "phi", "ReQ", "ImQ"}, {}};
    Table energy{{"y", "E1", "E2", "E3", "E4"}, {}};
    for (double y : row_grid(pr, cfg.grid_step)) {
      const Trajectory& t = y >= 0.0 ? pr.positive() : pr.negative();
      double st[2];
      t.sample_into(y, std::span<double>(st, 2));
      const double phi =
          phase_at(pr.phase(y >= 0.0 ? OdeSide::PositiveY : OdeSide::NegativeY), y);
      const auto q = st[0] * std::polar(1.0, phi);
      traj.rows.push_back({y, st[0], st[1], phi, q.real(), q.imag()});
      // E1/E2 on the reflected variable for y < 0, E3/E4 for y > 0.
      std::vector<std::optional<double>> row{y, {}, {}, {}, {}};
      const double s = std::abs(y);
      if (y <= 0.0) {
        row[1] = energy_e1(s, st[0], -st[1]);
        if (y < 0.0) row[2] = energy_e2(s, st[0], -st[1]);
      }
      if (y >= 0.0) {
        row[3] = energy_e3(s, st[0], st[1]);
        if (y > 0.0) row[4] = energy_e4(s, st[0], st[1]);
      }
      energy.rows.push_back(std::move(row));
    }
    w.table("trajectory", traj, opt.format);
    w.table("energy", energy, opt.format);

    const auto refl = integrate_scalar(reflected_rhs, init.reflected(), 0.0,
                                       -pr.negative().y_reached(), cfg.solver);
    const auto n1 = first_zero(refl, 0);
    // sup |A| on [0, 1/3] against 2|A0|
    double small_sup = 0.0;
    for (int k = 0; k <= 200; ++k) {
      const double y = k / 600.0;
      if (pr.positive().covers(y)) small_sup = std::max(small_sup, std::abs(pr.positive().sample(y)[0]));
    }

    ordered_json s = metadata(cfg);
    s["config"] = config_json(cfg);
    s["positive"] = side_json(pr.positive());
    s["negative"] = side_json(pr.negative());
    s["decay"] = decay_json(decay_report(pr.positive(), pr.negative()));
    s["n1"] = n1 ? ordered_json(*n1) : ordered_json(nullptr);
    s["y0"] = 1.0 / 3.0;
    s["y0_bound_holds"] = small_sup <= 2.0 * std::abs(cfg.a0);
    w.json("summary.json", s);
    out << "solve: positive " << to_string(pr.positive().termination()) << " at "
        << format_double(pr.positive().y_reached()) << ", negative "
        << to_string(pr.negative().termination()) << " at "
        << format_double(pr.negative().y_reached()) << "\n";
    return finish(w, opt, out, 0);
  });
}

// ---------------------------------------------------------------------------
// fit

namespace {

ordered_json fit_side(const RunConfig& cfg, OdeSide side, bool& within) {
  ordered_json rec = metadata(cfg);
  rec["side"] = to_string(side);
  try {
    auto traj = std::make_shared<const Trajectory>(
        solve_amplitude({cfg.a0, cfg.a1}, side, cfg.y_max, cfg.solver));
    const BPath path = BPath::from_amplitude(traj, side, 1.0);
    const PolarPath polar = polar_decompose(path);
    const AsymptoticFit fit = fit_asymptotics(polar, cfg.fit_lo, cfg.fit_hi, side);
    const double expected = expected_log_coeff(side, fit.q_limit);
    const double rel = std::abs(fit.log_coeff - expected) / std::abs(expected);
    const EbValue eb = energy_eb(cfg.fit_lo, path, path.eta_max());
    rec["q_limit"] = fit.q_limit;
    rec["omega0"] = fit.omega0;
    rec["log_coeff"] = fit.log_coeff;
    rec["expected_log_coeff"] = expected;
    rec["relative_error"] = rel;
    rec["residual_sup"] = fit.residual_sup;
    rec["inv_coeff"] = fit.inv_coeff;
    rec["derived_log_coeff"] = derived_log_coeff(side, fit.q_limit);
    rec["sqrt_2eb"] = std::sqrt(2.0 * eb.value);
    rec["eta_lo"] = fit.eta_lo;
    rec["eta_hi"] = fit.eta_hi;
    if (!(rel <= 0.05)) within = false;
  } catch (const Error& e) {
    rec.update(error_record(e));
    throw;
  }
  return rec;
}

}  // namespace

int cmd_fit(const RunConfig& cfg, const Options& opt, std::ostream& out) {
  return guarded(&cfg, out, [&] {
    cfg.validate();
    Writer w(cfg.output_dir);
    bool within = true;
    int status = 0;
    for (OdeSide side : {OdeSide::PositiveY, OdeSide::NegativeY}) {
      const std::string name = std::string("fit_") + to_string(side) + ".json";
      ordered_json rec;
      try {
        rec = fit_side(cfg, side, within);
        out << "fit " << to_string(side) << ": log_coeff " << format_double(rec["log_coeff"].get<double>())
            << " expected " << format_double(rec["expected_log_coeff"].get<double>())
            << " relative_error " << format_double(rec["relative_error"].get<double>()) << "\n";
      } catch (const Error& e) {
        rec = metadata(cfg);
        rec["side"] = to_string(side);
        rec.update(error_record(e));
        out << "fit " << to_string(side) << ": " << rec.dump() << "\n";
        status = 2;
      }
      w.json(name, rec);
    }
    if (status == 0 && !within) status = 1;
    return finish(w, opt, out, status);
  });
}

// ---------------------------------------------------------------------------
// sweep

namespace {

ordered_json sweep_row(const RunConfig& cfg, double a0) {
  ordered_json row;
  row["a0"] = a0;
  const InitialData init{a0, cfg.a1};
  bool blowup = false;
  std::shared_ptr<const Trajectory> sides[2];
  for (OdeSide side : {OdeSide::PositiveY, OdeSide::NegativeY}) {
    auto t = std::make_shared<const Trajectory>(solve_amplitude(init, side, cfg.y_max, cfg.solver));
    ordered_json sj = side_json(*t);
    sj["weighted_peak"] = decay_report(*t).sup_weighted_a;
    blowup = blowup || t->termination() == Termination::Blowup;
    row[to_string(side)] = std::move(sj);
    sides[side == OdeSide::PositiveY ? 0 : 1] = std::move(t);
  }
  row["blowup"] = blowup;
  row["decay"] = decay_json(decay_report(*sides[0], *sides[1]));
  // Growth exponent of |A| on the outer decade of the positive side.
  try {
    row["envelope_exponent"] = envelope_slope(*sides[0], 0.1 * cfg.y_max, cfg.y_max).slope;
  } catch (const Error& e) {
    row["envelope_exponent"] = nullptr;
  }
  for (int k = 0; k < 2; ++k) {
    const OdeSide side = k == 0 ? OdeSide::PositiveY : OdeSide::NegativeY;
    const std::string key = std::string("fit_") + to_string(side);
    try {
      const BPath path = BPath::from_amplitude(sides[k], side, 1.0);
      const AsymptoticFit fit = fit_asymptotics(polar_decompose(path), cfg.fit_lo, cfg.fit_hi, side);
      ordered_json f;
      f["q_limit"] = fit.q_limit;
      f["log_coeff"] = fit.log_coeff;
      f["expected_log_coeff"] = expected_log_coeff(side, fit.q_limit);
      f["residual_sup"] = fit.residual_sup;
      row[key] = std::move(f);
    } catch (const Error& e) {
      row[key] = error_record(e);
    }
  }
  return row;
}

}  // namespace

int cmd_sweep(const RunConfig& cfg, const std::vector<double>& a0_list, const Options& opt,
              std::ostream& out) {
  return guarded(&cfg, out, [&] {
    cfg.validate();
    if (a0_list.empty()) throw Error(ErrorKind::Config, "sweep needs at least one a0");
    Writer w(cfg.output_dir);
    std::vector<ordered_json> rows(a0_list.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < a0_list.size(); i = next++) {
        try {
          rows[i] = sweep_row(cfg, a0_list[i]);
        } catch (const Error& e) {
          rows[i] = error_record(e);
          rows[i]["a0"] = a0_list[i];
        }
      }
    };
    const unsigned n = std::min<unsigned>(sweep_threads(), static_cast<unsigned>(a0_list.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    // per-row files first, index last
    Table table{{"a0", "blowup", "positive_y_reached", "negative_y_reached", "sup_weighted_a",
                 "sup_weighted_da", "envelope_exponent", "log_coeff_positive", "log_coeff_negative"},
                {}};
    std::optional<double> largest_global, smallest_blowup;
    auto get = [](const ordered_json& j, const char* a, const char* b = nullptr) -> std::optional<double> {
      const ordered_json* p = &j;
      if (!p->contains(a)) return std::nullopt;
      p = &(*p)[a];
      if (b) {
        if (!p->is_object() || !p->contains(b)) return std::nullopt;
        p = &(*p)[b];
      }
      if (!p->is_number()) return std::nullopt;
      return p->get<double>();
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::ostringstream name;
      name << "rows/row_" << std::setw(4) << std::setfill('0') << i << ".json";
      w.json(name.str(), rows[i]);
      const auto& r = rows[i];
      const bool has = r.contains("blowup");
      const bool blew = has && r["blowup"].get<bool>();
      if (has) {
        const double a0 = std::abs(a0_list[i]);
        if (blew && (!smallest_blowup || a0 < *smallest_blowup)) smallest_blowup = a0;
        if (!blew && (!largest_global || a0 > *largest_global)) largest_global = a0;
      }
      table.rows.push_back({a0_list[i], has ? std::optional<double>(blew ? 1.0 : 0.0) : std::nullopt,
                            get(r, "positive", "y_reached"), get(r, "negative", "y_reached"),
                            get(r, "decay", "sup_weighted_a"), get(r, "decay", "sup_weighted_da"),
                            get(r, "envelope_exponent"), get(r, "fit_positive", "log_coeff"),
                            get(r, "fit_negative", "log_coeff")});
    }
    ordered_json index = metadata(cfg);
    index["config"] = config_json(cfg);
    index["rows"] = rows;
    index["largest_global_a0"] = largest_global ? ordered_json(*largest_global) : ordered_json(nullptr);
    index["smallest_blowup_a0"] =
        smallest_blowup ? ordered_json(*smallest_blowup) : ordered_json(nullptr);
    w.table("sweep", table, Format::Csv);
    w.json("sweep.json", index);
    out << "sweep: " << rows.size() << " rows on " << n << " threads\n";
    return finish(w, opt, out, 0);
  });
}

// ---------------------------------------------------------------------------
// bessel

int cmd_bessel(const std::vector<double>& ys, const Options& opt, std::ostream& out) {
  return guarded(nullptr, out, [&] {
    Table t{{"y", "G_even", "G_odd", "G_even_asym", "G_odd_asym", "residual_even", "residual_odd",
             "wronskian"},
            {}};
    for (double y : ys) {
      const Jet e = g_even_jet(y), o = g_odd_jet(y);
      const bool asym = std::abs(y) >= 5.0;
      t.rows.push_back({y, e.value, o.value,
                        asym ? std::optional<double>(asymptotic_g(y, Parity::Even)) : std::nullopt,
                        asym ? std::optional<double>(asymptotic_g(y, Parity::Odd)) : std::nullopt,
                        linear_residual(e, y), linear_residual(o, y), wronskian(y)});
    }
    if (opt.format == Format::Csv) {
      out << t.csv();
    } else {
      out << t.json().dump(2) << "\n";
    }
    return 0;
  });
}

// ---------------------------------------------------------------------------
// export

int cmd_export(const RunConfig& cfg, const Options& opt, std::ostream& out) {
  return guarded(&cfg, out, [&] {
    cfg.validate();
    Writer w(cfg.output_dir);
    for (OdeSide side : {OdeSide::PositiveY, OdeSide::NegativeY}) {
      auto traj = std::make_shared<const Trajectory>(
          solve_amplitude({cfg.a0, cfg.a1}, side, cfg.y_max, cfg.solver));
      const BPath path = BPath::from_amplitude(traj, side, 1.0);
      const PolarPath polar = polar_decompose(path);
      Table t{{"eta", "B", "dB", "R", "omega", "omega_plus_eta"}, {}};
      for (std::size_t i = 0; i < path.size(); ++i) {
        t.rows.push_back({path[i].eta, path[i].b, path[i].db, polar.r[i], polar.omega[i],
                          polar.omega[i] + path[i].eta});
      }
      w.table(std::string("polar_") + to_string(side), t, opt.format);
    }
    out << "export: polar paths written to " << cfg.output_dir << "\n";
    return finish(w, opt, out, 0);
  });
}

// ---------------------------------------------------------------------------
// check

namespace {

CheckResult at_most(std::string name, double value, double tol) {
  return {std::move(name), value, tol, value <= tol};
}

}  // namespace

std::vector<CheckResult> run_checks(const RunConfig& cfg) {
  cfg.validate();
  const SolverConfig& sc = cfg.solver;
  std::vector<CheckResult> out;

  // linearized
  double res = 0.0, wr = 0.0;
  for (int k = -2000; k <= 2000; ++k) {
    const double y = k / 100.0;
    res = std::max({res, std::abs(linear_residual(g_even_jet(y), y)),
                    std::abs(linear_residual(g_odd_jet(y), y))});
    wr = std::max(wr, std::abs(wronskian(y) - 1.0));
  }
  out.push_back(at_most("linearized.ode_residual", res, 1e-8));
  out.push_back(at_most("linearized.wronskian", wr, 1e-8));

  const Trajectory lin = integrate_scalar(linear_rhs, {1.0, 0.0}, 0.0, 20.0, sc);
  double dev = 0.0;
  for (int k = 0; k <= 20000; ++k) {
    const double y = k / 1000.0;
    dev = std::max(dev, std::abs(lin.sample(y)[0] - g_even(y)));
  }
  out.push_back(at_most("integrator.linear_vs_g_even", dev, 1e-7));

  const auto end = lin.state(lin.size() - 1);
  const Trajectory back =
      integrate_scalar(linear_rhs, {end[0], end[1]}, lin.y_reached(), 0.0, sc);
  const auto s0 = back.state(back.size() - 1);
  out.push_back(at_most("integrator.time_reversal",
                        std::max(std::abs(s0[0] - 1.0), std::abs(s0[1])), 1e-6));

  const InitialData init{cfg.a0, cfg.a1};
  const Trajectory bwd = integrate_scalar(amplitude_rhs, init, 0.0, -20.0, sc);
  const Trajectory rfl = integrate_scalar(reflected_rhs, init.reflected(), 0.0, 20.0, sc);
  double rd = 0.0;
  for (int k = 0; k <= 2000; ++k) {
    const double y = k / 100.0;
    const auto a = bwd.sample(-y), b = rfl.sample(y);
    rd = std::max({rd, std::abs(a[0] - b[0]), std::abs(a[1] + b[1])});
  }
  out.push_back(at_most("integrator.backward_vs_reflected", rd, 1e-8));

  // profile core
  double local = 0.0;
  for (double a0 : {0.1, 0.5}) {
    for (double a1 : {0.0, 0.1}) {
      const auto ts = taylor_series({a0, a1}, 20);
      const auto pc = picard_iterate({a0, a1}, 0.25, 8);
      for (int k = -250; k <= 250; ++k) {
        const double y = k / 1000.0;
        local = std::max(local, std::abs(ts(y) - pc.approx(y)));
      }
    }
  }
  out.push_back(at_most("profile_core.series_vs_picard", local, 1e-8));

  // diagnostics
  const Trajectory r05 = integrate_scalar(reflected_rhs, {0.5, 0.0}, 0.0, 100.0, sc);
  const auto mr = monotonicity_report(r05, OdeSide::NegativeY);
  const Trajectory p01 = integrate_scalar(amplitude_rhs, {0.1, 0.0}, 0.0, 200.0, sc);
  const auto mp = monotonicity_report(p01, OdeSide::PositiveY);
  for (const auto* c : {&mr.first, &mr.second, &mp.first, &mp.second}) {
    out.push_back(at_most(std::string("diagnostics.monotonicity ") + c->name,
                          c->max_relative_violation, 1e-9));
  }
  const auto ex = extrema(r05);
  const auto osc = oscillation_inequalities(ex, r05, PotentialSpec::reflected_amplitude());
  out.push_back(at_most("diagnostics.oscillation_margin", -osc.min_margin, 1e-9));
  out.push_back(at_most("diagnostics.interlacing", osc.interlaced ? 0.0 : 1.0, 0.0));
  out.push_back(at_most("diagnostics.maxima_monotone", osc.maxima_monotone ? 0.0 : 1.0, 0.0));

  // asymptotics, both sides of the configured data
  for (OdeSide side : {OdeSide::PositiveY, OdeSide::NegativeY}) {
    const std::string tag = std::string(".") + to_string(side);
    auto traj = std::make_shared<const Trajectory>(solve_amplitude(init, side, cfg.y_max, sc));
    const BPath path = BPath::from_amplitude(traj, side, 1.0);
    const PolarPath polar = polar_decompose(path);
    const AsymptoticFit fit = fit_asymptotics(polar, cfg.fit_lo, cfg.fit_hi, side);
    const double expected = expected_log_coeff(side, fit.q_limit);
    out.push_back(at_most("asymptotics.log_coeff" + tag,
                          std::abs(fit.log_coeff - expected) / std::abs(expected), 0.05));
    const EbReport eb = eb_report(path, cfg.fit_lo, path.eta_max());
    out.push_back(at_most("diagnostics.eb_constancy" + tag, eb.spread, 1e-6));
    out.push_back(at_most("asymptotics.q_vs_sqrt_2eb" + tag,
                          std::abs(fit.q_limit / std::sqrt(2.0 * eb.mean) - 1.0), 0.01));
    out.push_back(at_most("asymptotics.fit_residual_decays" + tag,
                          fit.residual_outer - fit.residual_inner, 0.0));
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double y : {25.0, 50.0, 100.0}) {
      const double e = weighted_envelope(*traj, y, 2.0 * y);
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    out.push_back(at_most("asymptotics.envelope_law" + tag, hi / lo - 1.0, 0.03));
  }

  const Profile pr = Profile::solve(init, 30.0, sc, cfg.phi0);
  out.push_back(at_most("asymptotics.profile_residual", profile_residual_sup(pr, 0.0, 30.0), 1e-6));
  const double dphi0 = -0.75 * cfg.a0 * cfg.a0;
  const auto e0 = std::polar(1.0, cfg.phi0);
  constexpr std::complex<double> i{0.0, 1.0};
  const Trajectory direct =
      integrate_complex_profile(cfg.a0 * e0, (cfg.a1 + i * cfg.a0 * dphi0) * e0, 0.0, 30.0, sc);
  out.push_back(at_most("asymptotics.complex_vs_polar", complex_polar_mismatch(pr, direct), 1e-6));
  std::vector<double> ts, xs;
  for (int k = 0; k <= 12; ++k) ts.push_back(1.0 + k * 0.25);
  for (int k = 0; k <= 400; ++k) xs.push_back(-10.0 + k * 0.05);
  out.push_back(at_most("asymptotics.pde_residual", pde_residual(pr, ts, xs).sup, 1e-6));

  const double ws[] = {25.0, 50.0, 100.0, 200.0};
  const auto sec = duhamel_secular(0.0, 400.0, ws);
  double worst_growth = 0.0;
  for (double g : sec.growth) worst_growth = std::max(worst_growth, 1.8 - g);
  out.push_back(at_most("asymptotics.secular_growth", worst_growth, 0.0));
  out.push_back(at_most("asymptotics.secular_slope",
                        std::abs(sec.windows[2].slope / 0.375 - 1.0), 0.02));

  // blowup regression
  const auto big = detect_blowup({2.0, 0.0}, OdeSide::PositiveY, sc, 1000.0);
  out.push_back(at_most("integrator.blowup_a0_2", big.triggered ? 0.0 : 1.0, 0.0));
  const auto small = detect_blowup({0.05, 0.0}, OdeSide::PositiveY, sc, 200.0);
  out.push_back(at_most("integrator.global_a0_0.05", small.triggered ? 1.0 : 0.0, 0.0));
  return out;
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  return guarded(nullptr, out, [&] {
    const auto results = run_checks(cfg);
    int failures = 0;
    for (const auto& r : results) {
      out << (r.pass ? "PASS " : "FAIL ") << r.name << " value=" << format_double(r.value)
          << " tol=" << format_double(r.tolerance) << "\n";
      if (!r.pass) ++failures;
    }
    out << failures << " of " << results.size() << " checks failed\n";
    return failures == 0 ? 0 : 1;
  });
}

// ---------------------------------------------------------------------------
// compare

namespace {

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool close(double a, double b, double rel) {
  if (a == b) return true;
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

void compare_json(const ordered_json& a, const ordered_json& b, const std::string& where,
                  double rel, std::vector<std::string>& out) {
  if (a.is_number() && b.is_number()) {
    if (!close(a.get<double>(), b.get<double>(), rel)) {
      out.push_back(where + ": " + a.dump() + " vs " + b.dump());
    }
    return;
  }
  if (a.type() != b.type()) {
    out.push_back(where + ": type differs");
    return;
  }
  if (a.is_object()) {
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key())) {
        out.push_back(where + "/" + it.key() + ": missing in reference");
      } else {
        compare_json(it.value(), b[it.key()], where + "/" + it.key(), rel, out);
      }
    }
    for (auto it = b.begin(); it != b.end(); ++it) {
      if (!a.contains(it.key())) out.push_back(where + "/" + it.key() + ": missing in output");
    }
  } else if (a.is_array()) {
    if (a.size() != b.size()) {
      out.push_back(where + ": length " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
      return;
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      compare_json(a[k], b[k], where + "[" + std::to_string(k) + "]", rel, out);
    }
  } else if (a != b) {
    out.push_back(where + ": " + a.dump() + " vs " + b.dump());
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

CompareResult compare_files(const fs::path& produced, const fs::path& reference, double rel) {
  CompareResult r;
  const auto a = read_file(produced), b = read_file(reference);
  if (!a) r.mismatches.push_back("cannot read " + produced.string());
  if (!b) r.mismatches.push_back("cannot read " + reference.string());
  if (!r.ok() || *a == *b) return r;
  if (produced.extension() == ".json") {
    try {
      compare_json(ordered_json::parse(*a), ordered_json::parse(*b), "", rel, r.mismatches);
    } catch (const ordered_json::exception& e) {
      r.mismatches.push_back(std::string("invalid JSON: ") + e.what());
    }
    return r;
  }
  const auto la = split(*a, '\n'), lb = split(*b, '\n');
  if (la.size() != lb.size()) {
    r.mismatches.push_back("line count " + std::to_string(la.size()) + " vs " +
                           std::to_string(lb.size()));
    return r;
  }
  for (std::size_t k = 0; k < la.size() && r.mismatches.size() < 20; ++k) {
    if (la[k] == lb[k]) continue;
    const auto fa = split(la[k], ','), fb = split(lb[k], ',');
    bool same = fa.size() == fb.size();
    for (std::size_t c = 0; same && c < fa.size(); ++c) {
      if (fa[c] == fb[c]) continue;
      double x = 0, y = 0;
      const auto ra = std::from_chars(fa[c].data(), fa[c].data() + fa[c].size(), x);
      const auto rb = std::from_chars(fb[c].data(), fb[c].data() + fb[c].size(), y);
      same = ra.ec == std::errc() && rb.ec == std::errc() && close(x, y, rel);
    }
    if (!same) r.mismatches.push_back("line " + std::to_string(k + 1) + " differs");
  }
  return r;
}

}  // namespace dnls::cli
