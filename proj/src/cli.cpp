#include "semistart/cli.hpp"

#include "semistart/bandwidth.hpp"
#include "semistart/csv.hpp"
#include "semistart/densities.hpp"
#include "semistart/estimator.hpp"
#include "semistart/exact_mise.hpp"
#include "semistart/multivariate.hpp"
#include "semistart/numerics.hpp"
#include "semistart/regression.hpp"
#include "semistart/starts.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>

namespace semistart::cli {

namespace {

struct Common
{
  std::string data_path;
  std::string out_path;
  bool header = false;
  int precision = 6;
  std::string kernel = "gaussian";
  std::string start = "normal";
  double clip = kDefaultClip;
  bool no_clip = false;
  int components = 2;
  std::uint64_t seed = 1;
  std::optional<double> h;
  std::string method = "rule_delta";
  std::string grid;
  int iterations = 1;
  std::optional<double> roughness;
};

struct Grid
{
  double lo;
  double hi;
  int count;

  std::vector<double> points() const
  {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) {
      out[i] = lo + (hi - lo) * i / (count - 1);
    }
    return out;
  }
};

Grid
parse_grid(const std::string& spec)
{
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    parts.push_back(item);
  }
  if (parts.size() != 3) {
    throw std::invalid_argument("--grid expects lo,hi,count");
  }
  Grid g{};
  try {
    std::size_t pos = 0;
    g.lo = std::stod(parts[0], &pos);
    g.hi = std::stod(parts[1], &pos);
    g.count = std::stoi(parts[2], &pos);
  } catch (const std::logic_error&) {
    throw std::invalid_argument("--grid expects numbers lo,hi,count");
  }
  if (g.count < 2) {
    throw std::invalid_argument("--grid count must be at least 2");
  }
  if (!(g.hi > g.lo)) {
    throw std::invalid_argument("--grid needs hi > lo");
  }
  return g;
}

CsvTable
load_table(const Common& c)
{
  if (c.data_path.empty()) {
    throw std::invalid_argument("--data is required");
  }
  auto t = c.data_path == "-" ? read_csv(std::cin, c.header)
                              : read_csv_file(c.data_path, c.header);
  if (t.rows.empty()) {
    throw std::invalid_argument("no data rows in '" + c.data_path + "'");
  }
  return t;
}

std::optional<double>
clip_of(const Common& c)
{
  if (c.no_clip) {
    return std::nullopt;
  }
  return c.clip;
}

FittedStart
make_start(const Common& c, std::span<const double> data)
{
  const auto family = parse_start_family(c.start);
  if (family == StartFamily::normal_mixture) {
    auto s = em_fit_mixture(data, c.components, c.seed);
    s.clip = clip_of(c);
    return s;
  }
  return fit_start(family, data, clip_of(c));
}

BandwidthChoice
choose_h(const Common& c,
         std::span<const double> data,
         const KernelSpec& kernel,
         const FittedStart& start)
{
  const auto method = parse_bandwidth_method(c.method);
  switch (method) {
    case BandwidthMethod::amise_oracle: {
      if (!c.roughness) {
        throw std::invalid_argument("amise_oracle needs --roughness");
      }
      BandwidthChoice out;
      out.method = method;
      out.h = amise_h(kernel, *c.roughness, static_cast<double>(data.size())).h;
      out.roughness = *c.roughness;
      out.h_os = h_os(kernel, sample_sd(data), static_cast<double>(data.size()));
      return out;
    }
    case BandwidthMethod::rule_gamma:
      return rule_gamma(data, kernel);
    case BandwidthMethod::rule_delta:
      return rule_delta(data, kernel);
    case BandwidthMethod::plugin:
      return plugin(data, start, kernel, c.iterations);
    case BandwidthMethod::bcv:
    case BandwidthMethod::ucv: {
      std::vector<double> grid;
      if (c.grid.empty()) {
        grid = default_h_grid(data, kernel);
      } else {
        grid = parse_grid(c.grid).points();
      }
      return method == BandwidthMethod::bcv ? bcv(data, start, kernel, grid)
                                            : ucv(data, start, kernel, grid);
    }
  }
  throw std::invalid_argument("unknown bandwidth method");
}

double
resolve_h(const Common& c,
          std::span<const double> data,
          const KernelSpec& kernel,
          const FittedStart& start,
          bool method_given)
{
  if (c.h) {
    if (method_given) {
      throw std::invalid_argument("--h and --method are mutually exclusive");
    }
    if (!(*c.h > 0.0)) {
      throw DomainError("bandwidth must be positive");
    }
    return *c.h;
  }
  Common copy = c;
  copy.grid.clear();  // --grid is the evaluation grid here, not an h grid
  return choose_h(copy, data, kernel, start).h;
}

class Output
{
public:
  Output(const std::string& path, std::ostream& fallback)
    : stream_(&fallback)
  {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) {
        throw std::invalid_argument("cannot write '" + path + "'");
      }
      stream_ = &file_;
    }
  }

  std::ostream& get() { return *stream_; }

private:
  std::ofstream file_;
  std::ostream* stream_;
};

void
add_common_io(CLI::App* sub, Common& c)
{
  sub->add_option("--data,data", c.data_path, "input CSV ('-' for stdin)");
  sub->add_option("--out", c.out_path, "output path (default stdout)");
  sub->add_flag("--header", c.header, "input has a header / write a header");
  sub->add_option("--precision", c.precision, "significant digits")
    ->check(CLI::Range(1, 17));
}

void
add_estimation_options(CLI::App* sub, Common& c, CLI::Option*& method_opt)
{
  sub->add_option("--kernel", c.kernel, "gaussian, epanechnikov or uniform");
  sub->add_option("--start", c.start,
                  "constant, normal, lognormal, gamma or mixture");
  sub->add_option("--clip", c.clip, "start clipping threshold in sd units");
  sub->add_flag("--no-clip", c.no_clip, "evaluate the start unclipped");
  sub->add_option("--components", c.components, "mixture start components")
    ->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "seed for the mixture fit");
  sub->add_option("--h", c.h, "bandwidth");
  method_opt = sub->add_option(
    "--method", c.method,
    "amise_oracle, rule_gamma, rule_delta, plugin, bcv or ucv");
  sub->add_option("--iterations", c.iterations, "plug-in iterations")
    ->check(CLI::PositiveNumber);
  sub->add_option("--roughness", c.roughness, "R_new for amise_oracle");
}

void
emit(Output& o,
     const Common& c,
     const std::vector<std::string>& header,
     const std::vector<std::vector<double>>& rows,
     bool force_header = false)
{
  write_csv(o.get(), header, rows, c.precision, c.header || force_header);
}

int
cmd_estimate(const Common& c, bool method_given, bool normalize, bool compare,
             std::ostream& out)
{
  if (c.h && method_given) {
    throw std::invalid_argument("--h and --method are mutually exclusive");
  }
  const auto table = load_table(c);
  const auto kernel = kernel_props(parse_kernel_shape(c.kernel));
  Output o(c.out_path, out);

  if (table.width() >= 2) {
    const auto d = static_cast<Eigen::Index>(table.width());
    Eigen::MatrixXd data(static_cast<Eigen::Index>(table.rows.size()), d);
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      for (Eigen::Index k = 0; k < d; ++k) {
        data(i, k) = table.rows[i][k];
      }
    }
    double h = 0.0;
    if (c.h) {
      if (method_given) {
        throw std::invalid_argument("--h and --method are mutually exclusive");
      }
      h = *c.h;
    } else {
      h = mv_bandwidth(data).h;
    }
    MvOptions opts;
    opts.clip = clip_of(c);
    const MvEstimate est(data, h, opts);
    std::vector<std::vector<double>> axes;
    for (Eigen::Index k = 0; k < d; ++k) {
      if (!c.grid.empty()) {
        axes.push_back(parse_grid(c.grid).points());
      } else {
        const double lo = data.col(k).minCoeff();
        const double hi = data.col(k).maxCoeff();
        const double pad = 0.25 * (hi - lo);
        axes.push_back(Grid{ lo - pad, hi + pad, 41 }.points());
      }
    }
    std::vector<std::string> header;
    for (Eigen::Index k = 0; k < d; ++k) {
      header.push_back("x" + std::to_string(k + 1));
    }
    header.push_back("f_hat");
    std::vector<std::vector<double>> rows;
    std::vector<std::size_t> idx(d, 0);
    for (;;) {
      Eigen::VectorXd x(d);
      std::vector<double> row;
      for (Eigen::Index k = 0; k < d; ++k) {
        x[k] = axes[k][idx[k]];
        row.push_back(x[k]);
      }
      row.push_back(est(x));
      rows.push_back(std::move(row));
      Eigen::Index k = d - 1;
      while (k >= 0 && ++idx[k] == axes[k].size()) {
        idx[k] = 0;
        --k;
      }
      if (k < 0) {
        break;
      }
    }
    emit(o, c, header, rows);
    return 0;
  }

  auto data = table.column(0);
  const auto start = make_start(c, data);
  const double h = resolve_h(c, data, kernel, start, method_given);
  const DensityEstimate est(data, kernel, h, start, normalize);
  std::vector<double> grid;
  if (!c.grid.empty()) {
    grid = parse_grid(c.grid).points();
  } else {
    const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
    grid = Grid{ *mn - 3.0 * h, *mx + 3.0 * h, 201 }.points();
  }
  std::vector<std::vector<double>> rows;
  for (double x : grid) {
    std::vector<double> row{ x, est(x) };
    if (compare) {
      row.push_back(estimate_kernel(data, kernel, h, x));
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::string> header{ "x", "f_hat" };
  if (compare) {
    header.emplace_back("f_tilde");
  }
  emit(o, c, header, rows);
  return 0;
}

int
cmd_bandwidth(const Common& c, std::ostream& out)
{
  const auto table = load_table(c);
  const auto kernel = kernel_props(parse_kernel_shape(c.kernel));
  Output o(c.out_path, out);
  nlohmann::json j;
  if (table.width() >= 2) {
    Eigen::MatrixXd data(static_cast<Eigen::Index>(table.rows.size()),
                         static_cast<Eigen::Index>(table.width()));
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      for (Eigen::Index k = 0; k < data.cols(); ++k) {
        data(i, k) = table.rows[i][k];
      }
    }
    const auto b = mv_bandwidth(data);
    j = { { "method", "mv_delta" },
          { "h", b.h },
          { "diagnostics",
            { { "cap", b.cap }, { "brace", b.brace }, { "clamped", b.clamped } } } };
  } else {
    const auto data = table.column(0);
    const auto start = make_start(c, data);
    j = choose_h(c, data, kernel, start);
    j["start"] = start;
  }
  o.get() << j.dump(2) << '\n';
  return 0;
}

std::vector<int>
default_cases()
{
  std::vector<int> v(15);
  std::iota(v.begin(), v.end(), 1);
  return v;
}

int
cmd_bench_amise(const Common& c, std::vector<int> cases, std::ostream& out)
{
  if (cases.empty()) {
    cases = default_cases();
  }
  Output o(c.out_path, out);
  std::vector<std::vector<double>> rows;
  for (int id : cases) {
    const auto m = marron_wand(id);
    const auto r = roughness(m);
    const auto l = l1_measures(m);
    rows.push_back({ static_cast<double>(id), r.rho_trad, r.rho_new, l.rho1_trad,
                     l.rho1_new });
  }
  emit(o, c, { "case", "rho_trad", "rho_new", "rho1_trad", "rho1_new" }, rows,
       true);
  return 0;
}

int
cmd_bench_mise(const Common& c, std::vector<int> cases, std::vector<int> ns,
               std::ostream& out)
{
  if (cases.empty()) {
    cases = default_cases();
  }
  if (ns.empty()) {
    ns = { 25, 100, 1000 };
  }
  Output o(c.out_path, out);
  const auto rows = benchmark_table(cases, ns);
  write_benchmark_csv(o.get(), rows, c.precision, true);
  return 0;
}

int
cmd_gof(const Common& c, bool method_given, std::ostream& out)
{
  const auto table = load_table(c);
  const auto data = table.column(0);
  const auto kernel = kernel_props(parse_kernel_shape(c.kernel));
  const auto start = make_start(c, data);
  const double h = resolve_h(c, data, kernel, start, method_given);
  const DensityEstimate est(data, kernel, h, start);
  std::vector<double> grid;
  if (!c.grid.empty()) {
    grid = parse_grid(c.grid).points();
  } else {
    const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
    grid = Grid{ *mn, *mx, 201 }.points();
  }
  const auto curve = correction_curve(est, grid);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rows.push_back({ curve.grid[i], curve.r_hat[i], curve.log_r[i], curve.z[i] });
  }
  Output o(c.out_path, out);
  emit(o, c, { "x", "r_hat", "log_r", "z" }, rows);
  return 0;
}

int
cmd_sample(const Common& c, const std::string& mixture_path,
           std::optional<int> case_id, std::optional<std::size_t> n,
           std::ostream& out)
{
  if (!n) {
    throw std::invalid_argument("--n is required");
  }
  if (mixture_path.empty() == !case_id.has_value()) {
    throw std::invalid_argument("give exactly one of --mixture and --case");
  }
  NormalMixture m = NormalMixture::standard_normal();
  if (case_id) {
    m = marron_wand(*case_id);
  } else {
    std::ifstream in(mixture_path);
    if (!in) {
      throw std::invalid_argument("cannot open '" + mixture_path + "'");
    }
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument(std::string("bad mixture JSON: ") + e.what());
    }
    m = mixture_from_json(j);
  }
  const auto xs = mixture_sample(m, *n, c.seed);
  std::vector<std::vector<double>> rows;
  rows.reserve(xs.size());
  for (double x : xs) {
    rows.push_back({ x });
  }
  Output o(c.out_path, out);
  emit(o, c, { "x" }, rows);
  return 0;
}

int
cmd_regress(const Common& c, const std::string& mean_start, std::ostream& out)
{
  const auto table = load_table(c);
  if (table.width() < 2) {
    throw std::invalid_argument("regress needs two columns x,y");
  }
  if (!c.h) {
    throw std::invalid_argument("regress needs --h");
  }
  const auto kernel = kernel_props(parse_kernel_shape(c.kernel));
  auto xs = table.column(0);
  auto ys = table.column(1);
  const auto fit =
    make_regression(xs, ys, kernel, *c.h, parse_mean_start_kind(mean_start));
  std::vector<double> grid;
  if (!c.grid.empty()) {
    grid = parse_grid(c.grid).points();
  } else {
    const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
    grid = Grid{ *mn, *mx, 101 }.points();
  }
  std::vector<std::vector<double>> rows;
  for (double x : grid) {
    rows.push_back(
      { x, gnw_estimate(fit, x), nw_estimate(xs, ys, kernel, *c.h, x) });
  }
  Output o(c.out_path, out);
  emit(o, c, { "x", "m_hat", "m_classic" }, rows);
  return 0;
}

} // namespace

int
run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Semiparametric density estimation with a parametric start" };
  app.name("semistart");
  app.require_subcommand(1);
  // --h is a bandwidth, so help is long-form only
  app.set_help_flag("--help", "print help");

  Common c;
  CLI::Option* method_opt = nullptr;
  bool normalize = false;
  bool compare = false;
  std::vector<int> cases;
  std::vector<int> ns;
  std::string mixture_path;
  std::optional<int> case_id;
  std::optional<std::size_t> n;
  std::string mean_start = "linear";

  auto* estimate = app.add_subcommand("estimate", "density estimate on a grid");
  add_common_io(estimate, c);
  add_estimation_options(estimate, c, method_opt);
  auto* estimate_method = method_opt;
  estimate->add_option("--grid", c.grid, "evaluation grid lo,hi,count");
  estimate->add_flag("--normalize", normalize, "divide by the estimate's integral");
  estimate->add_flag("--compare", compare, "add the classic kernel estimate");

  auto* bandwidth = app.add_subcommand("bandwidth", "select a bandwidth");
  add_common_io(bandwidth, c);
  add_estimation_options(bandwidth, c, method_opt);
  bandwidth->add_option("--grid", c.grid, "bandwidth grid lo,hi,count for bcv/ucv");

  auto* bench_amise = app.add_subcommand("bench-amise", "roughness table");
  bench_amise->add_option("--cases", cases, "test density cases")
    ->delimiter(',')
    ->check(CLI::Range(1, 15));
  bench_amise->add_option("--out", c.out_path, "output path");
  bench_amise->add_option("--precision", c.precision, "significant digits")
    ->check(CLI::Range(1, 17));

  auto* bench_mise = app.add_subcommand("bench-mise", "exact mise table");
  bench_mise->add_option("--cases", cases, "test density cases")
    ->delimiter(',')
    ->check(CLI::Range(1, 15));
  bench_mise->add_option("--n", ns, "sample sizes")
    ->delimiter(',')
    ->check(CLI::PositiveNumber);
  bench_mise->add_option("--out", c.out_path, "output path");
  bench_mise->add_option("--precision", c.precision, "significant digits")
    ->check(CLI::Range(1, 17));

  auto* gof = app.add_subcommand("gof", "correction curve and Z diagnostics");
  add_common_io(gof, c);
  add_estimation_options(gof, c, method_opt);
  auto* gof_method = method_opt;
  gof->add_option("--grid", c.grid, "evaluation grid lo,hi,count");

  auto* sample = app.add_subcommand("sample", "draw from a normal mixture");
  sample->add_option("--mixture", mixture_path, "mixture JSON file");
  sample->add_option("--case", case_id, "test density case")
    ->check(CLI::Range(1, 15));
  sample->add_option("--n", n, "sample size")->check(CLI::PositiveNumber);
  sample->add_option("--seed", c.seed, "random seed");
  sample->add_option("--out", c.out_path, "output path");
  sample->add_flag("--header", c.header, "write a header");
  sample->add_option("--precision", c.precision, "significant digits")
    ->check(CLI::Range(1, 17));

  auto* regress = app.add_subcommand("regress", "generalized Nadaraya-Watson");
  add_common_io(regress, c);
  regress->add_option("--kernel", c.kernel, "gaussian, epanechnikov or uniform");
  regress->add_option("--h", c.h, "bandwidth");
  regress->add_option("--mean-start", mean_start, "constant or linear");
  regress->add_option("--grid", c.grid, "evaluation grid lo,hi,count");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (estimate->parsed()) {
      return cmd_estimate(c, estimate_method->count() > 0, normalize, compare, out);
    }
    if (bandwidth->parsed()) {
      return cmd_bandwidth(c, out);
    }
    if (bench_amise->parsed()) {
      return cmd_bench_amise(c, cases, out);
    }
    if (bench_mise->parsed()) {
      return cmd_bench_mise(c, cases, ns, out);
    }
    if (gof->parsed()) {
      return cmd_gof(c, gof_method->count() > 0, out);
    }
    if (sample->parsed()) {
      return cmd_sample(c, mixture_path, case_id, n, out);
    }
    if (regress->parsed()) {
      return cmd_regress(c, mean_start, out);
    }
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const QuadratureError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << "error: no subcommand\n";
  return 2;
}

} // namespace semistart::cli
