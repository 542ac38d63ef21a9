// Command-line front end: constants, exact sums, convergence studies, class
// checks, h-coefficient tables, and identity verifications, emitted as CSV
// or JSON for reproducible experiment runs.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lcmavg/closed_forms.hpp"
#include "lcmavg/errors.hpp"
#include "lcmavg/euler_product.hpp"
#include "lcmavg/exact_sums.hpp"
#include "lcmavg/h_coefficients.hpp"
#include "lcmavg/multiplicative.hpp"
#include "lcmavg/parallel.hpp"
#include "lcmavg/table_io.hpp"
#include "lcmavg/version.hpp"
#include "lcmavg/zeta.hpp"

namespace {

using nlohmann::json;
using namespace lcmavg;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitTolerance = 3;
constexpr int kExitResourceCap = 4;
constexpr int kExitInvariant = 5;
constexpr int kExitOverflow = 6;

struct CommonOptions {
  std::string function = "id";
  double r = 1.0;
  int k = 2;
  double tol = 1e-9;
  long prime_cap = 10'000'000;
  int exp_cap = 64;
  std::string format = "json";
  std::string out_path;
  int workers = default_worker_count();
  bool no_timestamp = false;
  bool force = false;
};

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

json base_metadata(const CommonOptions& opt) {
  json meta;
  meta["engine_version"] = kEngineVersion;
  meta["workers"] = opt.workers;
  json caps;
  caps["prime_cap"] = opt.prime_cap;
  caps["exponent_cap"] = opt.exp_cap;
  caps["sum_caps_enforced"] = !opt.force;
  meta["caps"] = caps;
  if (!opt.no_timestamp) meta["generated_at"] = iso_timestamp();
  return meta;
}

void deliver(const CommonOptions& opt, const std::string& content) {
  if (opt.out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
  } else {
    write_text_file(opt.out_path, content);
  }
}

void deliver_json(const CommonOptions& opt, const json& doc) {
  deliver(opt, doc.dump(2) + "\n");
}

EulerProductCaps product_caps(const CommonOptions& opt) {
  EulerProductCaps caps;
  caps.prime_cap = opt.prime_cap;
  caps.exponent_cap = opt.exp_cap;
  caps.prime_start = std::min<long>(100'000, opt.prime_cap);
  return caps;
}

SumCaps sum_caps(const CommonOptions& opt) {
  SumCaps caps;
  caps.enforce = !opt.force;
  return caps;
}

void validate_common(const CommonOptions& opt, int k_max = 8) {
  if (opt.k < 2 || opt.k > k_max)
    throw ConfigError("k must be in [2, " + std::to_string(k_max) + "]");
  if (!(opt.r > -1.0 && opt.r <= 32.0))
    throw ConfigError("r must be in (-1, 32]");
  if (!(opt.tol >= 1e-12 && opt.tol <= 1e-2))
    throw ConfigError("tolerance must be in [1e-12, 1e-2]");
  if (opt.prime_cap < 1000 || opt.prime_cap > 100'000'000)
    throw ConfigError("prime cap must be in [1e3, 1e8]");
  if (opt.exp_cap < 2 || opt.exp_cap > 128)
    throw ConfigError("exponent cap must be in [2, 128]");
  if (opt.workers < 1 || opt.workers > 256)
    throw ConfigError("workers must be in [1, 256]");
  parse_output_format(opt.format);  // throws on bad format
}

void add_common_flags(CLI::App* cmd, CommonOptions& opt, bool with_function,
                      bool with_tol_caps) {
  if (with_function) {
    cmd->add_option("--f", opt.function,
                    "catalog function (id, sigma, beta, phi, psi, *_pow, "
                    "unitary_phi, unitary_sigma, exp_sigma, mu2, one)");
    cmd->add_option("--r", opt.r, "function exponent r");
  }
  if (with_tol_caps) {
    cmd->add_option("--tol", opt.tol, "target tolerance");
    cmd->add_option("--prime-cap", opt.prime_cap, "max prime cutoff");
    cmd->add_option("--exp-cap", opt.exp_cap, "max exponent cutoff");
  }
  cmd->add_option("--format", opt.format, "output format: csv or json");
  cmd->add_option("--out", opt.out_path, "output path (default: stdout)");
  cmd->add_option("--workers", opt.workers,
                  "worker threads (default: LCMAVG_WORKERS or hardware)");
  cmd->add_flag("--no-timestamp", opt.no_timestamp,
                "omit the timestamp field from JSON metadata");
}

SumKind parse_kind(const std::string& kind) {
  if (kind == "lcm") return SumKind::lcm;
  if (kind == "ratio") return SumKind::ratio;
  if (kind == "normalized") return SumKind::normalized_lcm;
  if (kind == "gcd") return SumKind::gcd;
  throw ConfigError("unknown kind: " + kind);
}

std::vector<long> parse_x_list(const std::string& text) {
  std::vector<long> xs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    xs.push_back(std::stol(item));
  }
  if (xs.empty()) throw ConfigError("empty x list");
  return xs;
}

// ---------------------------------------------------------------------------
// constants
// ---------------------------------------------------------------------------

int run_constants(const CommonOptions& opt, const std::string& kernel_str,
                  bool with_closed_form) {
  validate_common(opt);
  Kernel kernel;
  if (kernel_str == "lcm") {
    kernel = Kernel::lcm_max;
  } else if (kernel_str == "ratio") {
    kernel = Kernel::ratio_max_minus_min;
  } else {
    throw ConfigError("unknown kernel: " + kernel_str);
  }
  const MultiplicativeFunction f = make_function(opt.function, opt.r);
  const EulerProductResult res =
      euler_product(f, opt.k, kernel, opt.tol, product_caps(opt), opt.workers);

  std::optional<double> closed;
  if (with_closed_form) {
    if (kernel == Kernel::lcm_max &&
        f.kind() == MultiplicativeFunction::Kind::id_r) {
      if (opt.k == 2) closed = closed_form_k2("id", f.r(), opt.tol).value;
      if (opt.k == 3) closed = closed_form_C3(f.r(), opt.tol).value;
      if (opt.k == 4) closed = closed_form_C4(f.r(), opt.tol).value;
    } else if (kernel == Kernel::ratio_max_minus_min &&
               f.kind() == MultiplicativeFunction::Kind::id_r && opt.k <= 4) {
      closed = closed_form_D(opt.k, f.r(), opt.tol).value;
    } else if (kernel == Kernel::lcm_max && opt.k == 2 &&
               (f.kind() == MultiplicativeFunction::Kind::sigma_r ||
                f.kind() == MultiplicativeFunction::Kind::phi_r) &&
               f.r() == 1.0) {
      closed = closed_form_k2(f.name(), f.r(), opt.tol).value;
    }
  }

  if (parse_output_format(opt.format) == OutputFormat::csv) {
    std::string csv = "value,prime_cutoff,exponent_cutoff,error_estimate\n";
    csv += format_double(res.value) + "," + std::to_string(res.prime_cutoff) +
           "," + std::to_string(res.exponent_cutoff) + "," +
           format_double(res.error_estimate) + "\n";
    deliver(opt, csv);
  } else {
    json doc;
    doc["command"] = "constants";
    doc["function"] = f.name();
    doc["r"] = f.r();
    doc["k"] = opt.k;
    doc["kernel"] = kernel_name(kernel);
    doc["value"] = res.value;
    doc["prime_cutoff"] = res.prime_cutoff;
    doc["exponent_cutoff"] = res.exponent_cutoff;
    doc["error_estimate"] = res.error_estimate;
    if (closed) doc["closed_form"] = *closed;
    json meta = base_metadata(opt);
    meta["tolerance"] = opt.tol;
    doc["metadata"] = meta;
    deliver_json(opt, doc);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sum
// ---------------------------------------------------------------------------

int run_sum(const CommonOptions& opt, long x, const std::string& kind_str,
            bool brute, bool no_main) {
  validate_common(opt);
  if (x < 1) throw ConfigError("x must be >= 1");
  const MultiplicativeFunction f = make_function(opt.function, opt.r);
  const SumKind kind = parse_kind(kind_str);

  ExactSumResult res;
  if (kind == SumKind::gcd) {
    res = brute ? sum_gcd_bruteforce(f, opt.k, x, sum_caps(opt), opt.workers)
                : sum_gcd_via_identity(f, opt.k, x, sum_caps(opt));
  } else {
    std::optional<double> constant;
    if (!no_main) {
      if (f.constant_one()) {
        constant = 1.0;
      } else {
        const Kernel kernel = kind == SumKind::ratio
                                  ? Kernel::ratio_max_minus_min
                                  : Kernel::lcm_max;
        constant = euler_product(f, opt.k, kernel, opt.tol, product_caps(opt),
                                 opt.workers)
                       .value;
      }
    }
    res = exact_sum(f, opt.k, x, kind, constant, sum_caps(opt), opt.workers);
  }

  if (parse_output_format(opt.format) == OutputFormat::csv) {
    std::string csv = "x,value,main_term,relative_error\n";
    csv += std::to_string(res.x) + ",";
    csv += res.exact ? res.value_exact.get_str() : format_double(res.value);
    csv += ",";
    csv += res.main_term ? format_double(*res.main_term) : std::string();
    csv += ",";
    csv += res.relative_error ? format_double(*res.relative_error)
                              : std::string();
    csv += "\n";
    deliver(opt, csv);
  } else {
    json doc;
    doc["command"] = "sum";
    doc["function"] = f.name();
    doc["r"] = f.r();
    doc["k"] = opt.k;
    doc["kind"] = sum_kind_name(kind);
    if (kind == SumKind::gcd) doc["method"] = brute ? "bruteforce" : "identity";
    doc["x"] = res.x;
    doc["exact"] = res.exact;
    if (res.exact) doc["value"] = res.value_exact.get_str();
    doc["value_real"] = res.value;
    if (res.main_term) doc["main_term"] = *res.main_term;
    if (res.relative_error) doc["relative_error"] = *res.relative_error;
    doc["metadata"] = base_metadata(opt);
    deliver_json(opt, doc);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// converge
// ---------------------------------------------------------------------------

int run_converge(const CommonOptions& opt, const std::string& x_list,
                 const std::string& kind_str) {
  validate_common(opt);
  const MultiplicativeFunction f = make_function(opt.function, opt.r);
  const SumKind kind = parse_kind(kind_str);
  const std::vector<long> xs = parse_x_list(x_list);
  const ConvergenceTable table = convergence_study(
      f, opt.k, kind, xs, sum_caps(opt), opt.workers, opt.tol);

  if (parse_output_format(opt.format) == OutputFormat::csv) {
    deliver(opt, render_table_csv(table.rows));
  } else {
    json meta = base_metadata(opt);
    meta["function"] = table.function;
    meta["r"] = table.r;
    meta["k"] = table.k;
    meta["kind"] = sum_kind_name(table.kind);
    meta["constant"] = table.constant;
    meta["constant_tolerance"] = opt.tol;
    if (table.fitted_slope) {
      meta["fitted_slope"] = *table.fitted_slope;
    } else {
      meta["fitted_slope"] = nullptr;
    }
    deliver_json(opt, render_table_json(table.rows, meta));
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify-class
// ---------------------------------------------------------------------------

int run_verify_class(const CommonOptions& opt, long prime_limit,
                     int exponent_limit) {
  validate_common(opt);
  if (prime_limit < 2 || prime_limit > 10'000'000)
    throw ConfigError("prime limit must be in [2, 1e7]");
  if (exponent_limit < 2 || exponent_limit > 64)
    throw ConfigError("exponent limit must be in [2, 64]");
  const MultiplicativeFunction f = make_function(opt.function, opt.r);
  const ClassReport rep =
      check_class_membership(f, f.r(), prime_limit, exponent_limit);

  if (parse_output_format(opt.format) == OutputFormat::csv) {
    std::string csv =
        "r,C1_observed,C2_observed,C3_derived,prime_limit,exponent_limit\n";
    csv += format_double(rep.r) + "," + format_double(rep.C1_observed) + "," +
           format_double(rep.C2_observed) + "," +
           format_double(rep.C3_derived) + "," +
           std::to_string(rep.prime_limit) + "," +
           std::to_string(rep.exponent_limit) + "\n";
    deliver(opt, csv);
  } else {
    json doc;
    doc["command"] = "verify-class";
    doc["function"] = f.name();
    doc["r"] = rep.r;
    doc["C1_observed"] = rep.C1_observed;
    doc["C2_observed"] = rep.C2_observed;
    doc["C3_derived"] = rep.C3_derived;
    doc["prime_limit"] = rep.prime_limit;
    doc["exponent_limit"] = rep.exponent_limit;
    doc["metadata"] = base_metadata(opt);
    deliver_json(opt, doc);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// h-table
// ---------------------------------------------------------------------------

int run_h_table(const CommonOptions& opt, long box, bool decay,
                double epsilon) {
  validate_common(opt, 4);
  if (box < 1 || box > 256) throw ConfigError("box must be in [1, 256]");
  const MultiplicativeFunction f = make_function(opt.function, opt.r);

  json doc;
  doc["command"] = "h-table";
  doc["function"] = f.name();
  doc["r"] = f.r();
  doc["k"] = opt.k;
  doc["box"] = box;

  std::string csv;
  {
    std::string header;
    for (int i = 1; i <= opt.k; ++i)
      header += "d" + std::to_string(i) + ",";
    csv = header + "h\n";
  }
  json entries = json::array();
  std::array<long, 4> d{};
  size_t cells = 1;
  for (int i = 0; i < opt.k; ++i) cells *= static_cast<size_t>(box);

  auto each_tuple = [&](auto&& value_of) {
    for (size_t idx = 0; idx < cells; ++idx) {
      size_t rest = idx;
      for (int i = 0; i < opt.k; ++i) {
        d[static_cast<size_t>(i)] =
            static_cast<long>(rest % static_cast<size_t>(box)) + 1;
        rest /= static_cast<size_t>(box);
      }
      const std::string v =
          value_of(std::span<const long>(d.data(), static_cast<size_t>(opt.k)));
      json entry;
      entry["d"] = std::vector<long>(d.begin(), d.begin() + opt.k);
      entry["h"] = v;
      entries.push_back(entry);
      for (int i = 0; i < opt.k; ++i)
        csv += std::to_string(d[static_cast<size_t>(i)]) + ",";
      csv += v + "\n";
    }
  };

  if (f.integer_valued()) {
    const auto table = h_table_exact(f, opt.k, box, opt.workers);
    each_tuple([&](std::span<const long> t) { return table.at(t).get_str(); });
  } else {
    const auto table = h_table_real(f, opt.k, box, opt.workers);
    each_tuple(
        [&](std::span<const long> t) { return format_double(table.at(t)); });
  }
  doc["entries"] = std::move(entries);

  if (decay) {
    const HDecayReport rep =
        h_decay_report(f, opt.k, box, epsilon, opt.workers);
    json dj;
    dj["A"] = rep.A;
    dj["epsilon"] = rep.epsilon;
    dj["box_points"] = rep.box_points;
    dj["partial_sums"] = rep.partial_sums;
    dj["increments"] = rep.increments;
    dj["increments_shrink"] = rep.increments_shrink;
    dj["pass_applicable"] = rep.pass_applicable;
    doc["decay"] = dj;
  }

  if (parse_output_format(opt.format) == OutputFormat::csv) {
    deliver(opt, csv);
  } else {
    doc["metadata"] = base_metadata(opt);
    deliver_json(opt, doc);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify-identities
// ---------------------------------------------------------------------------

int run_verify_identities(const CommonOptions& opt, long limit, long gcd_x) {
  validate_common(opt);
  if (limit < 1 || limit > 500)
    throw ConfigError("limit must be in [1, 500]");
  if (gcd_x < 1 || gcd_x > 2000)
    throw ConfigError("gcd check bound must be in [1, 2000]");

  const TripleIdentityReport fern = check_fernandez_identity(limit);

  bool gcd_ok = true;
  std::string gcd_failure;
  for (const char* name : {"id", "sigma", "phi", "mu2"}) {
    const MultiplicativeFunction f = make_function(name, 1.0);
    for (int k : {2, 3}) {
      const ExactSumResult a = sum_gcd_via_identity(f, k, gcd_x);
      const ExactSumResult b =
          sum_gcd_bruteforce(f, k, gcd_x, {}, opt.workers);
      if (a.value_exact != b.value_exact) {
        gcd_ok = false;
        gcd_failure = std::string(name) + " k=" + std::to_string(k);
      }
    }
  }

  json doc;
  doc["command"] = "verify-identities";
  json fj;
  fj["limit"] = fern.limit;
  fj["holds"] = fern.holds;
  fj["triples_checked"] = fern.triples_checked;
  if (fern.counterexample) {
    fj["counterexample"] = *fern.counterexample;
  } else {
    fj["counterexample"] = nullptr;
  }
  doc["lcm_gcd_triple_identity"] = fj;
  json gj;
  gj["x"] = gcd_x;
  gj["functions"] = {"id", "sigma", "phi", "mu2"};
  gj["k"] = {2, 3};
  gj["holds"] = gcd_ok;
  if (!gcd_ok) gj["first_failure"] = gcd_failure;
  doc["gcd_identity"] = gj;
  doc["metadata"] = base_metadata(opt);

  if (parse_output_format(opt.format) == OutputFormat::csv) {
    std::string csv = "check,holds\n";
    csv += "lcm_gcd_triple_identity," +
           std::string(fern.holds ? "true" : "false") + "\n";
    csv += "gcd_identity," + std::string(gcd_ok ? "true" : "false") + "\n";
    deliver(opt, csv);
  } else {
    deliver_json(opt, doc);
  }
  return fern.holds && gcd_ok ? kExitOk : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Euler-product constants and exact finite sums for multiplicative "
      "functions of lcm/gcd tuples"};
  app.require_subcommand(1);

  CommonOptions opt;

  // constants
  auto* c_const = app.add_subcommand(
      "constants", "compute a mean-value constant as an Euler product");
  std::string kernel = "lcm";
  bool closed_flag = false;
  c_const->add_option("--k", opt.k, "tuple arity");
  c_const->add_option("--kernel", kernel, "kernel: lcm or ratio");
  c_const->add_flag("--closed-form", closed_flag,
                    "also report the closed form when one exists");
  add_common_flags(c_const, opt, true, true);

  // sum
  auto* c_sum = app.add_subcommand("sum", "exact finite sum over the cube");
  long x = 1;
  std::string kind = "lcm";
  bool brute = false, no_main = false;
  c_sum->add_option("--k", opt.k, "tuple arity");
  c_sum->add_option("--x", x, "range bound")->required();
  c_sum->add_option("--kind", kind, "lcm, ratio, normalized, or gcd");
  c_sum->add_flag("--brute", brute, "gcd kind: direct enumeration route");
  c_sum->add_flag("--no-main", no_main, "skip the main-term computation");
  c_sum->add_flag("--force", opt.force, "override the feasibility caps");
  add_common_flags(c_sum, opt, true, true);

  // converge
  auto* c_conv = app.add_subcommand(
      "converge", "exact sums against the main term over an x list");
  std::string x_list;
  c_conv->add_option("--k", opt.k, "tuple arity");
  c_conv->add_option("--x-list", x_list, "comma-separated ascending x values")
      ->required();
  c_conv->add_option("--kind", kind, "lcm, ratio, normalized, or gcd");
  c_conv->add_flag("--force", opt.force, "override the feasibility caps");
  add_common_flags(c_conv, opt, true, true);

  // verify-class
  auto* c_class = app.add_subcommand(
      "verify-class", "observed growth constants over a scan range");
  long prime_limit = 10'000;
  int exponent_limit = 8;
  c_class->add_option("--prime-limit", prime_limit, "scan primes up to");
  c_class->add_option("--exp-limit", exponent_limit, "scan exponents up to");
  add_common_flags(c_class, opt, true, false);

  // h-table
  auto* c_h = app.add_subcommand(
      "h-table", "inversion coefficients on a box, optionally with decay");
  long box = 16;
  bool decay = false;
  double epsilon = 0.5;
  c_h->add_option("--k", opt.k, "tuple arity (2..4)");
  c_h->add_option("--box", box, "per-coordinate bound");
  c_h->add_flag("--decay", decay, "include the weighted decay report");
  c_h->add_option("--epsilon", epsilon, "decay exponent offset");
  add_common_flags(c_h, opt, true, false);

  // verify-identities
  auto* c_ver = app.add_subcommand(
      "verify-identities",
      "triple lcm/gcd identity and the gcd-sum identity cross-check");
  long limit = 50, gcd_x = 200;
  c_ver->add_option("--limit", limit, "triple identity cube bound");
  c_ver->add_option("--gcd-x", gcd_x, "gcd identity cross-check bound");
  add_common_flags(c_ver, opt, false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (app.got_subcommand(c_const))
      return run_constants(opt, kernel, closed_flag);
    if (app.got_subcommand(c_sum)) return run_sum(opt, x, kind, brute, no_main);
    if (app.got_subcommand(c_conv)) return run_converge(opt, x_list, kind);
    if (app.got_subcommand(c_class))
      return run_verify_class(opt, prime_limit, exponent_limit);
    if (app.got_subcommand(c_h)) return run_h_table(opt, box, decay, epsilon);
    if (app.got_subcommand(c_ver))
      return run_verify_identities(opt, limit, gcd_x);
    throw ConfigError("no subcommand");
  } catch (const ToleranceNotMet& e) {
    std::cerr << "error (tolerance not met): " << e.what()
              << "\nbest value: " << format_double(e.best_value)
              << "\nerror estimate: " << format_double(e.error_estimate)
              << "\n";
    return kExitTolerance;
  } catch (const ResourceCapError& e) {
    std::cerr << "error (resource cap): " << e.what() << "\n";
    return kExitResourceCap;
  } catch (const OverflowError& e) {
    std::cerr << "error (arithmetic overflow): " << e.what() << "\n";
    return kExitOverflow;
  } catch (const ConfigError& e) {
    std::cerr << "error (invalid config): " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "error (invalid config): " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvariantError& e) {
    std::cerr << "error (internal invariant): " << e.what() << "\n";
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error (internal): " << e.what() << "\n";
    return kExitInvariant;
  }
}
