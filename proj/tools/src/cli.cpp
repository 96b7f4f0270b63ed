#include "relproj/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>

#include "relproj/fixpoint.hpp"
#include "relproj/random.hpp"

namespace relproj::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class NumericalAnomaly : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& token, const std::string& where) {
  const std::string t = trim(token);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) throw InputError(where + ": cannot parse number '" + t + "'");
  return v;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& tok : split(s, ',')) out.push_back(parse_double(tok, what));
  return out;
}

std::string lambda_tag(double lambda) {
  std::ostringstream s;
  s << lambda;
  return s.str();
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (!fs::is_directory(dir)) throw InputError("cannot create output directory " + dir.string());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path.string());
  return f;
}

void check_finite(const Vector& x, const std::string& what) {
  if (!all_finite(x)) throw NumericalAnomaly(what + ": non-finite value in iterate");
}

// Options shared by every subcommand that reads an instance.
struct InstanceArgs {
  std::string path;
  std::string blocks;
  Index p = 0;
  Index q = 0;
};

void add_instance_options(CLI::App* cmd, InstanceArgs& a) {
  cmd->add_option("--instance", a.path, "Instance file (rows 'a_1 ... a_q | b')");
  cmd->add_option("--blocks", a.blocks, "Row blocks, e.g. '0,1;2' (default: one block per row)");
  cmd->add_option("--p", a.p, "Rows of a generated Gaussian instance (used without --instance)");
  cmd->add_option("--q", a.q, "Columns of a generated Gaussian instance");
}

BlockSystem load_system(const InstanceArgs& a, std::uint64_t seed) {
  Instance inst;
  if (!a.path.empty()) {
    inst = read_instance_file(a.path);
  } else if (a.p >= 1 && a.q >= 1) {
    inst = gaussian_instance(a.p, a.q, seed);
  } else {
    throw InputError("give --instance FILE or both --p and --q");
  }
  auto blocks = parse_blocks(a.blocks, static_cast<std::size_t>(inst.m.rows()));
  return BlockSystem(std::move(inst.m), std::move(inst.b), std::move(blocks));
}

Vector parse_x0(const std::string& s, Index dim) {
  if (s.empty()) return Vector::Zero(dim);
  const auto v = parse_list(s, "--x0");
  if (static_cast<Index>(v.size()) != dim) {
    throw InputError("--x0 has " + std::to_string(v.size()) + " entries, expected " + std::to_string(dim));
  }
  return Eigen::Map<const Vector>(v.data(), dim);
}

Schedule make_schedule(const std::string& kind, double lambda, std::uint64_t seed) {
  if (kind == "cyclic") return Schedule::cyclic(lambda);
  if (kind == "random") return Schedule::random(seed, lambda);
  throw InputError("unknown schedule '" + kind + "' (expected random or cyclic)");
}

json kappa_options_json(const KappaOptions& o) {
  return {{"n_samples", o.n_samples}, {"n_validation", o.n_validation}, {"safety", o.safety}, {"seed", o.seed}};
}

std::vector<std::size_t> members_of(std::uint32_t mask) { return mask_members(mask); }

// ---------------------------------------------------------------- commands

struct Globals {
  std::uint64_t seed = 0;
  std::string out;
  bool full_vectors = false;
  std::size_t guard = kDefaultSubcollectionGuard;
};

struct GenArgs {
  Index p = 15;
  Index q = 10;
};

int cmd_gen(const Globals& g, const GenArgs& a, std::ostream& out) {
  if (a.p < 1 || a.q < 1) throw InputError("gen: p and q must be >= 1");
  const Instance inst = gaussian_instance(a.p, a.q, g.seed);
  const std::string comment =
      "relproj instance p=" + std::to_string(a.p) + " q=" + std::to_string(a.q) + " seed=" + std::to_string(g.seed);
  if (g.out.empty()) {
    write_instance(out, inst, comment);
  } else {
    auto f = open_out(g.out);
    write_instance(f, inst, comment);
    out << "wrote " << g.out << "\n";
  }
  return kOk;
}

struct RunArgs {
  InstanceArgs inst;
  std::string lambdas = "0.5,1,1.5";
  std::string schedules = "random,cyclic";
  std::size_t steps = 3000;
  std::string x0;
  bool highlight = false;
  bool varying = false;
  std::size_t validation = 20000;
};

void write_trace_header(std::ostream& f, Index dim, bool full) {
  f << "step,chosen_index,lambda";
  const Index shown = full ? dim : std::min<Index>(dim, 2);
  for (Index j = 0; j < shown; ++j) f << ",x_" << (j + 1);
  f << ",norm\n";
}

void write_point(std::ostream& f, const Vector& x, bool full) {
  const Index shown = full ? x.size() : std::min<Index>(x.size(), 2);
  for (Index j = 0; j < shown; ++j) f << ',' << format_double(x(j));
  f << ',' << format_double(x.norm()) << '\n';
}

int cmd_run(const Globals& g, const RunArgs& a, std::ostream& out) {
  const BlockSystem sys = load_system(a.inst, g.seed);
  const auto collection = blocks_to_affine(sys);
  const std::size_t ell = collection.size();
  const Index dim = sys.matrix().cols();
  const Vector x0 = parse_x0(a.x0, dim);
  const auto lambdas = parse_list(a.lambdas, "--lambda");
  const auto kinds = split(a.schedules, ',');
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  ensure_dir(dir);

  const auto lsq = least_squares(sys.matrix(), sys.rhs());
  out << "instance: " << sys.matrix().rows() << "x" << dim << ", " << ell << " affine subspaces, least-squares residual "
      << format_double(lsq.residual_norm) << "\n";

  for (double lambda : lambdas) {
    std::optional<BoundCertificate> cert;
    if (ell <= g.guard) {
      KappaOptions o;
      o.seed = g.seed;
      o.n_validation = a.validation;
      cert = bound_certificate(collection, lambda, o, g.guard);
    }
    for (const auto& kind : kinds) {
      Schedule sched = make_schedule(trim(kind), lambda, g.seed);
      if (a.varying) sched.with_varying(uniform_lambdas(a.steps, lambda, g.seed));
      const fs::path path = dir / ("trace_" + trim(kind) + "_lambda" + lambda_tag(lambda) + ".csv");
      auto f = open_out(path);
      write_trace_header(f, dim, g.full_vectors);

      std::ofstream hq;
      const bool highlight = a.highlight && sched.kind == ScheduleKind::cyclic;
      fs::path qpath;
      if (highlight) {
        qpath = path;
        qpath.replace_filename(path.stem().string() + "_Q.csv");
        hq = open_out(qpath);
        hq << "k,step";
        const Index shown = g.full_vectors ? dim : std::min<Index>(dim, 2);
        for (Index j = 0; j < shown; ++j) hq << ",x_" << (j + 1);
        hq << ",norm\n";
      }

      auto observer = [&](std::size_t n, const Vector& x) {
        check_finite(x, path.filename().string() + " step " + std::to_string(n));
        f << n << ',';
        if (n > 0) f << sched.index_at(n - 1, ell) << ',' << format_double(sched.lambda_at(n - 1));
        else f << ',';
        write_point(f, x, g.full_vectors);
        if (highlight && n > 0 && n % ell == 0) {
          hq << n / ell << ',' << n;
          write_point(hq, x, g.full_vectors);
        }
      };
      const auto trace = iterate(collection, sched, x0, a.steps, TraceStorage::norms_only, observer);

      out << path.filename().string() << ": sup_norm=" << format_double(trace.sup_norm)
          << " final_norm=" << format_double(trace.norms.back())
          << " final_residual=" << format_double((sys.matrix() * trace.final_iterate - sys.rhs()).norm());
      if (cert) {
        const auto check = verify_boundedness(trace, *cert, x0);
        out << " C=" << format_double(cert->C) << " bound=" << format_double(x0.norm() + lambda * cert->C)
            << (check.ok ? " within" : " VIOLATED") << " (validated-empirical)";
      } else {
        out << " certificate=skipped (" << ell << " subspaces > guard " << g.guard << ")";
      }
      if (highlight) out << " highlight=" << qpath.filename().string();
      out << "\n";
    }
  }
  return kOk;
}

struct FigureArgs {
  std::vector<std::string> traces;
};

int cmd_figure(const Globals& g, const FigureArgs& a, std::ostream& out) {
  if (a.traces.empty()) throw InputError("figure: no trace files given");
  std::vector<PlotTrace> plots;
  for (const auto& t : a.traces) {
    // Companion files are loaded alongside their trace.
    if (fs::path(t).stem().string().ends_with("_Q")) continue;
    plots.push_back(read_plot_trace(t));
  }
  if (plots.empty()) throw InputError("figure: only companion files given");
  const std::string svg = render_svg(plots);
  const fs::path path = g.out.empty() ? fs::path("figure.svg") : fs::path(g.out);
  auto f = open_out(path);
  f << svg;
  out << "wrote " << path.string() << " (" << plots.size() << " panels)\n";
  return kOk;
}

struct BoundArgs {
  InstanceArgs inst;
  double lambda = 1.0;
  std::size_t samples = 4096;
  std::size_t validation = 100000;
};

int cmd_bound(const Globals& g, const BoundArgs& a, std::ostream& out) {
  const BlockSystem sys = load_system(a.inst, g.seed);
  const auto collection = blocks_to_affine(sys);
  KappaOptions o;
  o.seed = g.seed;
  o.n_samples = a.samples;
  o.n_validation = a.validation;
  const auto cert = bound_certificate(collection, a.lambda, o, g.guard);

  out << "certificate (validated-empirical kappa_star)\n"
      << "  ell        " << cert.ell << "\n"
      << "  lambda     " << format_double(cert.lambda) << "\n"
      << "  tau        " << format_double(cert.tau) << "\n"
      << "  D          " << format_double(cert.D) << "\n"
      << "  kappa_star " << format_double(cert.kappa_star) << "\n"
      << "  C          " << format_double(cert.C) << "\n"
      << "  subcollection ledger:\n";
  json ledger = json::array();
  for (const auto& [mask, c] : cert.subcollection_ledger) {
    const auto members = members_of(mask);
    out << "    {";
    for (std::size_t i = 0; i < members.size(); ++i) out << (i ? "," : "") << members[i];
    out << "} C=" << format_double(c) << "\n";
    ledger.push_back({{"mask", mask}, {"members", members}, {"C", c}});
  }
  const json j = {{"ell", cert.ell},
                  {"lambda", cert.lambda},
                  {"tau", cert.tau},
                  {"D", cert.D},
                  {"kappa_star", cert.kappa_star},
                  {"C", cert.C},
                  {"label", "validated-empirical"},
                  {"kappa_options", kappa_options_json(o)},
                  {"subcollection_ledger", ledger}};
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  ensure_dir(dir);
  auto f = open_out(dir / "bound.json");
  f << j.dump(2) << "\n";
  return kOk;
}

struct KappaArgs {
  InstanceArgs inst;
  bool sweep = false;
  std::string thetas;
  std::size_t samples = 4096;
  std::size_t validation = 100000;
};

json report_json(const RegularityReport& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"first", members_of(p.first_mask)}, {"second", members_of(p.second_mask)}, {"kappa", p.kappa}});
  }
  return {{"kappa", r.kappa},
          {"kappa_sampled", r.kappa_sampled},
          {"kappa_dual", r.kappa_dual},
          {"kappa_star", r.kappa_star},
          {"method", to_string(r.method)},
          {"samples_checked", r.samples_checked},
          {"max_violation", r.max_violation},
          {"pairs", pairs}};
}

int cmd_kappa(const Globals& g, const KappaArgs& a, std::ostream& out) {
  KappaOptions o;
  o.seed = g.seed;
  o.n_samples = a.samples;
  o.n_validation = a.validation;
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  ensure_dir(dir);

  if (a.sweep) {
    std::vector<double> thetas;
    if (a.thetas.empty()) {
      for (double div : {2.0, 4.0, 8.0, 16.0}) thetas.push_back(std::numbers::pi / div);
    } else {
      thetas = parse_list(a.thetas, "--thetas");
    }
    out << "theta,kappa,closed_form\n";
    json rows = json::array();
    for (double theta : thetas) {
      Matrix u(2, 1), v(2, 1);
      u << 1.0, 0.0;
      v << std::cos(theta), std::sin(theta);
      const std::vector<LinearSubspace> pair{LinearSubspace::from_orthonormal(u), LinearSubspace::from_orthonormal(v)};
      const auto r = estimate_kappa(pair, o);
      const double exact = pair_kappa_closed_form(pair[0], pair[1]);
      out << format_double(theta) << ',' << format_double(r.kappa) << ',' << format_double(exact) << "\n";
      rows.push_back({{"theta", theta}, {"kappa", r.kappa}, {"closed_form", exact}, {"report", report_json(r)}});
    }
    auto f = open_out(dir / "kappa_sweep.json");
    f << json({{"sweep", rows}, {"kappa_options", kappa_options_json(o)}}).dump(2) << "\n";
    return kOk;
  }

  const BlockSystem sys = load_system(a.inst, g.seed);
  const auto dirs = directions_of(blocks_to_affine(sys));
  const auto r = kappa_star(dirs, o, g.guard);
  out << "regularity (" << to_string(r.method) << ")\n"
      << "  ell             " << dirs.size() << "\n"
      << "  kappa           " << format_double(r.kappa) << "\n"
      << "  kappa_star      " << format_double(r.kappa_star) << "\n"
      << "  samples_checked " << r.samples_checked << "\n"
      << "  max_violation   " << format_double(r.max_violation) << "\n"
      << "  pairs:\n";
  for (const auto& p : r.pairs) {
    const auto first = members_of(p.first_mask), second = members_of(p.second_mask);
    out << "    {";
    for (std::size_t i = 0; i < first.size(); ++i) out << (i ? "," : "") << first[i];
    out << "} vs {";
    for (std::size_t i = 0; i < second.size(); ++i) out << (i ? "," : "") << second[i];
    out << "} kappa=" << format_double(p.kappa) << "\n";
  }
  json j = report_json(r);
  j["ell"] = dirs.size();
  j["kappa_options"] = kappa_options_json(o);
  auto f = open_out(dir / "kappa.json");
  f << j.dump(2) << "\n";
  return kOk;
}

struct KaczmarzArgs {
  InstanceArgs inst;
  double lambda = 1.0;
  std::string schedule = "random";
  std::size_t steps = 10000;
  std::string x0;
};

int cmd_kaczmarz(const Globals& g, const KaczmarzArgs& a, std::ostream& out) {
  const BlockSystem sys = load_system(a.inst, g.seed);
  const Vector x0 = parse_x0(a.x0, sys.matrix().cols());
  const Schedule sched = make_schedule(a.schedule, a.lambda, g.seed);
  const auto report = solve(sys, sched, x0, a.steps, TraceStorage::norms_only);
  check_finite(report.trace.final_iterate, "kaczmarz");

  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  ensure_dir(dir);
  const fs::path path = dir / ("kaczmarz_" + a.schedule + "_lambda" + lambda_tag(a.lambda) + ".csv");
  auto f = open_out(path);
  f << "step,residual,lsq_distance,norm\n";
  for (std::size_t n = 0; n < report.residuals.size(); ++n) {
    f << n << ',' << format_double(report.residuals[n]) << ',' << format_double(report.lsq_distance[n]) << ','
      << format_double(report.trace.norms[n]) << '\n';
  }
  out << "blocks: " << sys.blocks().size() << ", consistent: " << (report.consistent ? "yes" : "no")
      << ", least-squares residual " << format_double(report.lsq_residual) << "\n"
      << "final residual " << format_double(report.residuals.back()) << ", sup_norm "
      << format_double(report.trace.sup_norm) << "\n"
      << "wrote " << path.string() << "\n";
  return kOk;
}

struct FixpointArgs {
  InstanceArgs inst;
  double lambda = 1.0;
  std::string word;
  std::size_t steps = 200;
  std::string x0;
};

int cmd_fixpoint(const Globals& g, const FixpointArgs& a, std::ostream& out) {
  const BlockSystem sys = load_system(a.inst, g.seed);
  const auto collection = blocks_to_affine(sys);
  std::vector<std::size_t> word;
  if (a.word.empty()) {
    for (std::size_t i = 0; i < collection.size(); ++i) word.push_back(i);
  } else {
    for (double v : parse_list(a.word, "--word")) {
      if (v < 0 || v != std::floor(v) || v >= static_cast<double>(collection.size())) {
        throw InputError("--word: index " + format_double(v) + " out of range");
      }
      word.push_back(static_cast<std::size_t>(v));
    }
  }
  std::vector<RelaxedProjector> projectors;
  for (auto i : word) projectors.emplace_back(collection[i], a.lambda);
  const AffineMap q = compose(projectors);
  const auto fps = fixed_points(q);
  const Vector x0 = parse_x0(a.x0, q.dim());

  json j = {{"word", word},
            {"lambda", a.lambda},
            {"consistent", fps.consistent},
            {"residual", fps.residual},
            {"fix_dim", fps.directions.dim()}};
  out << "Q over " << word.size() << " projectors, lambda " << format_double(a.lambda) << "\n"
      << "  Fix Q: " << (fps.consistent ? "nonempty" : "EMPTY (inconsistent)") << ", dimension "
      << fps.directions.dim() << ", residual " << format_double(fps.residual) << "\n";
  if (fps.consistent) {
    const Vector star = project_onto_fix(fps, x0);
    const auto rate = linear_rate(q, x0, star, a.steps);
    check_finite(star, "fixpoint");
    out << "  |x* | " << format_double(star.norm()) << ", rate " << format_double(rate.rate) << ", final residual "
        << format_double(rate.residuals.back()) << "\n";
    j["x_star"] = std::vector<double>(star.data(), star.data() + star.size());
    j["rate"] = rate.rate;
    j["residuals"] = rate.residuals;
  }
  const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
  ensure_dir(dir);
  auto f = open_out(dir / "fixpoint.json");
  f << j.dump(2) << "\n";
  return fps.consistent ? kOk : kNumericalAnomaly;
}

}  // namespace

// ---------------------------------------------------------------- formats

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Instance read_instance(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto bar = line.find('|');
    const std::string where = "instance line " + std::to_string(lineno);
    if (bar == std::string::npos) throw InputError(where + ": missing '|' before the right-hand side");
    std::istringstream coeffs(line.substr(0, bar));
    std::vector<double> row;
    std::string tok;
    while (coeffs >> tok) row.push_back(parse_double(tok, where));
    if (row.empty()) throw InputError(where + ": no coefficients");
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError(where + ": " + std::to_string(row.size()) + " coefficients, expected " +
                       std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
    rhs.push_back(parse_double(line.substr(bar + 1), where));
  }
  if (rows.empty()) throw InputError("instance has no equations");
  Instance inst{Matrix(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size())),
                Vector(static_cast<Index>(rows.size()))};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) inst.m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    inst.b(static_cast<Index>(i)) = rhs[i];
  }
  return inst;
}

Instance read_instance_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot read instance " + path.string());
  return read_instance(f);
}

void write_instance(std::ostream& out, const Instance& inst, const std::string& comment) {
  if (!comment.empty()) out << "# " << comment << "\n";
  for (Index i = 0; i < inst.m.rows(); ++i) {
    for (Index j = 0; j < inst.m.cols(); ++j) out << format_double(inst.m(i, j)) << ' ';
    out << "| " << format_double(inst.b(i)) << "\n";
  }
}

Instance gaussian_instance(Index p, Index q, std::uint64_t seed) {
  if (p < 1 || q < 1) throw InputError("instance dimensions must be >= 1");
  CounterRng rng(seed, 0x6a11);
  Instance inst{rng.normal_matrix(p, q), Vector()};
  for (Index i = 0; i < p; ++i) inst.m.row(i).normalize();
  inst.b = rng.normal_vector(p);
  return inst;
}

std::vector<std::vector<std::size_t>> parse_blocks(const std::string& spec, std::size_t rows) {
  std::vector<std::vector<std::size_t>> blocks;
  if (trim(spec).empty()) {
    for (std::size_t i = 0; i < rows; ++i) blocks.push_back({i});
    return blocks;
  }
  for (const auto& group : split(spec, ';')) {
    std::vector<std::size_t> block;
    for (const auto& tok : split(group, ',')) {
      const double v = parse_double(tok, "--blocks");
      if (v < 0 || v != std::floor(v)) throw InputError("--blocks: '" + trim(tok) + "' is not a row index");
      block.push_back(static_cast<std::size_t>(v));
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

namespace {

std::vector<std::pair<double, double>> read_xy(const fs::path& csv, bool required) {
  std::ifstream f(csv);
  if (!f) {
    if (required) throw InputError("cannot read trace " + csv.string());
    return {};
  }
  std::string line;
  if (!std::getline(f, line)) throw InputError(csv.string() + " line 1: empty file");
  const auto header = split(trim(line), ',');
  const auto col = [&](const std::string& name) -> std::ptrdiff_t {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : it - header.begin();
  };
  const auto c1 = col("x_1");
  const auto c2 = col("x_2");
  if (c1 < 0) throw InputError(csv.string() + " line 1: header has no x_1 column");
  std::vector<std::pair<double, double>> out;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split(trim(line), ',');
    const std::string where = csv.string() + " line " + std::to_string(lineno);
    if (fields.size() != header.size()) {
      throw InputError(where + ": " + std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(header.size()));
    }
    const double x = parse_double(fields[static_cast<std::size_t>(c1)], where);
    const double y = c2 < 0 ? 0.0 : parse_double(fields[static_cast<std::size_t>(c2)], where);
    out.emplace_back(x, y);
  }
  return out;
}

}  // namespace

PlotTrace read_plot_trace(const fs::path& csv) {
  PlotTrace t;
  t.title = csv.stem().string();
  t.path = read_xy(csv, true);
  fs::path companion = csv;
  companion.replace_filename(csv.stem().string() + "_Q.csv");
  if (fs::exists(companion)) t.highlight = read_xy(companion, false);
  return t;
}

std::string render_svg(const std::vector<PlotTrace>& traces) {
  if (traces.empty()) throw InputError("render_svg: no traces");
  const int cols = traces.size() == 1 ? 1 : 2;
  const int rows = static_cast<int>((traces.size() + static_cast<std::size_t>(cols) - 1) / static_cast<std::size_t>(cols));
  const double pw = 360, ph = 300, pad = 36;
  std::ostringstream s;
  s << std::fixed << std::setprecision(2);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << cols * pw << "\" height=\"" << rows * ph
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (std::size_t k = 0; k < traces.size(); ++k) {
    const auto& t = traces[k];
    const double ox = static_cast<double>(k % static_cast<std::size_t>(cols)) * pw;
    const double oy = static_cast<double>(k / static_cast<std::size_t>(cols)) * ph;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto* pts : {&t.path, &t.highlight}) {
      for (const auto& [x, y] : *pts) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
    }
    if (!(xmax >= xmin)) xmin = xmax = ymin = ymax = 0.0;
    const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    const double scale = (std::min(pw, ph) - 2 * pad) / span;
    auto px = [&](double x) { return ox + pw / 2 + (x - cx) * scale; };
    auto py = [&](double y) { return oy + ph / 2 + pad / 4 - (y - cy) * scale; };

    s << "<g>\n<rect x=\"" << ox + 4 << "\" y=\"" << oy + 4 << "\" width=\"" << pw - 8 << "\" height=\"" << ph - 8
      << "\" fill=\"none\" stroke=\"#999\"/>\n";
    s << "<text x=\"" << ox + pw / 2 << "\" y=\"" << oy + 20 << "\" text-anchor=\"middle\">" << t.title
      << "</text>\n";
    if (!t.path.empty()) {
      s << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"0.6\" stroke-opacity=\"0.7\" points=\"";
      for (std::size_t i = 0; i < t.path.size(); ++i) {
        s << (i ? " " : "") << px(t.path[i].first) << ',' << py(t.path[i].second);
      }
      s << "\"/>\n";
      s << "<circle cx=\"" << px(t.path.front().first) << "\" cy=\"" << py(t.path.front().second)
        << "\" r=\"3\" fill=\"black\"/>\n";
    }
    for (const auto& [x, y] : t.highlight) {
      s << "<rect x=\"" << px(x) - 2 << "\" y=\"" << py(y) - 2 << "\" width=\"4\" height=\"4\" fill=\"#d62728\"/>\n";
    }
    s << "</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

// ---------------------------------------------------------------- entry

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relaxed projections onto affine subspaces: iteration, certificates, regularity"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for instances, schedules and sampling");
  app.add_option("--out", g.out, "Output file (gen, figure) or directory (other commands)");
  app.add_flag("--full-vectors", g.full_vectors, "Write every coordinate to trace files");
  app.add_option("--guard-override", g.guard, "Largest collection for subcollection enumeration");

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "Generate a Gaussian instance with unit-norm rows");
  c_gen->add_option("--p", gen.p, "Number of equations");
  c_gen->add_option("--q", gen.q, "Number of unknowns");

  RunArgs run_args;
  auto* c_run = app.add_subcommand("run", "Run relaxed projection iterations and write trace CSVs");
  add_instance_options(c_run, run_args.inst);
  c_run->add_option("--lambda", run_args.lambdas, "Comma-separated relaxation parameters");
  c_run->add_option("--schedule", run_args.schedules, "Comma-separated schedules: random, cyclic");
  c_run->add_option("--steps", run_args.steps, "Number of iterations");
  c_run->add_option("--x0", run_args.x0, "Comma-separated starting point (default 0)");
  c_run->add_flag("--highlight", run_args.highlight, "Also write x_{k ell} for cyclic runs");
  c_run->add_flag("--varying", run_args.varying, "Draw lambda_n uniformly from [0, lambda]");
  c_run->add_option("--validation", run_args.validation, "Validation samples per kappa estimate");

  FigureArgs fig;
  auto* c_fig = app.add_subcommand("figure", "Render trace CSVs as a panel SVG");
  c_fig->add_option("traces", fig.traces, "Trace CSV files, row-major panel order")->required();

  BoundArgs bound;
  auto* c_bound = app.add_subcommand("bound", "Compute the boundedness certificate C");
  add_instance_options(c_bound, bound.inst);
  c_bound->add_option("--lambda", bound.lambda, "Relaxation parameter (or cap)");
  c_bound->add_option("--samples", bound.samples, "Search starts per kappa estimate");
  c_bound->add_option("--validation", bound.validation, "Validation samples per kappa estimate");

  KappaArgs kap;
  auto* c_kappa = app.add_subcommand("kappa", "Estimate regularity constants");
  add_instance_options(c_kappa, kap.inst);
  c_kappa->add_flag("--theta-sweep", kap.sweep, "Two lines in R^2 over a sweep of angles");
  c_kappa->add_option("--thetas", kap.thetas, "Comma-separated angles for the sweep");
  c_kappa->add_option("--samples", kap.samples, "Search starts per kappa estimate");
  c_kappa->add_option("--validation", kap.validation, "Validation samples per kappa estimate");

  KaczmarzArgs kz;
  auto* c_kz = app.add_subcommand("kaczmarz", "Block Kaczmarz on a linear system");
  add_instance_options(c_kz, kz.inst);
  c_kz->add_option("--lambda", kz.lambda, "Relaxation parameter");
  c_kz->add_option("--schedule", kz.schedule, "random or cyclic");
  c_kz->add_option("--steps", kz.steps, "Number of iterations");
  c_kz->add_option("--x0", kz.x0, "Comma-separated starting point (default 0)");

  FixpointArgs fx;
  auto* c_fix = app.add_subcommand("fixpoint", "Fixed points and linear rate of a composition Q");
  add_instance_options(c_fix, fx.inst);
  c_fix->add_option("--lambda", fx.lambda, "Relaxation parameter");
  c_fix->add_option("--word", fx.word, "Comma-separated indices, applied left to right (default 0..ell-1)");
  c_fix->add_option("--steps", fx.steps, "Applications of Q for the rate estimate");
  c_fix->add_option("--x0", fx.x0, "Comma-separated starting point (default 0)");

  std::vector<std::string> storage{"relproj"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (c_gen->parsed()) return cmd_gen(g, gen, out);
    if (c_run->parsed()) return cmd_run(g, run_args, out);
    if (c_fig->parsed()) return cmd_figure(g, fig, out);
    if (c_bound->parsed()) return cmd_bound(g, bound, out);
    if (c_kappa->parsed()) return cmd_kappa(g, kap, out);
    if (c_kz->parsed()) return cmd_kaczmarz(g, kz, out);
    if (c_fix->parsed()) return cmd_fixpoint(g, fx, out);
  } catch (const GuardExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kGuardExceeded;
  } catch (const NumericalAnomaly& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalAnomaly;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace relproj::cli
