#include "tensalg/problem_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "tensalg/error.hpp"
#include "tensalg/multigrid.hpp"
#include "tensalg/tensor_io.hpp"

namespace tensalg {

namespace {

[[noreturn]] void fail(const std::filesystem::path& source, std::size_t line, const std::string& what) {
  throw ParseError(source.string() + ":" + std::to_string(line) + ": " + what, line);
}

template <class T>
T number(const std::filesystem::path& source, std::size_t line, const std::string& text) {
  T v{};
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) fail(source, line, "bad number '" + text + "'");
  return v;
}

std::filesystem::path resolve(const std::filesystem::path& source, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute()) return path;
  return source.parent_path() / path;
}

}  // namespace

const char* solver_name(SolverKind kind) {
  switch (kind) {
    case SolverKind::direct: return "direct";
    case SolverKind::jacobi: return "jacobi";
    case SolverKind::cg: return "cg";
    case SolverKind::tmg: return "tmg";
  }
  return "?";
}

ProblemConfig parse_problem_config(std::istream& in, const std::filesystem::path& source) {
  ProblemConfig cfg;
  cfg.source = source;
  bool have_operator = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string key;
    if (!(ls >> key)) continue;
    std::vector<std::string> args;
    for (std::string a; ls >> a;) args.push_back(a);
    auto one = [&]() -> const std::string& {
      if (args.size() != 1) fail(source, line_no, "'" + key + "' takes one value");
      return args[0];
    };
    if (key == "space") {
      if (args.size() != 2) fail(source, line_no, "expected 'space <name> <extent>'");
      cfg.spaces.push_back({args[0], number<std::size_t>(source, line_no, args[1])});
    } else if (key == "operator") {
      if (args.empty()) fail(source, line_no, "'operator' needs a kind");
      have_operator = true;
      if (args[0] == "laplacian") {
        if (args.size() != 1) fail(source, line_no, "'operator laplacian' takes no parameters");
        cfg.op = OperatorKind::laplacian;
      } else if (args[0] == "convolution") {
        cfg.op = OperatorKind::convolution;
        cfg.kernel.clear();
        for (std::size_t i = 1; i < args.size(); ++i) cfg.kernel.push_back(number<double>(source, line_no, args[i]));
        if (cfg.kernel.empty() || cfg.kernel.size() % 2 == 0)
          fail(source, line_no, "convolution kernel must have an odd number of values");
      } else if (args[0] == "dense") {
        if (args.size() != 2) fail(source, line_no, "expected 'operator dense <path>'");
        cfg.op = OperatorKind::dense;
        cfg.dense_path = resolve(source, args[1]);
      } else {
        fail(source, line_no, "unknown operator '" + args[0] + "'");
      }
    } else if (key == "spec") {
      cfg.spec.clear();
      for (const auto& a : args) cfg.spec += a;
    } else if (key == "rhs") {
      cfg.rhs_path = resolve(source, one());
    } else if (key == "solver") {
      const auto& s = one();
      if (s == "direct") cfg.solver = SolverKind::direct;
      else if (s == "jacobi") cfg.solver = SolverKind::jacobi;
      else if (s == "cg") cfg.solver = SolverKind::cg;
      else if (s == "tmg") cfg.solver = SolverKind::tmg;
      else fail(source, line_no, "unknown solver '" + s + "'");
    } else if (key == "threshold") {
      cfg.options.threshold = number<double>(source, line_no, one());
      if (!(cfg.options.threshold >= 0.0)) fail(source, line_no, "threshold must be non-negative");
    } else if (key == "threshold_mode") {
      const auto& m = one();
      if (m == "absolute") cfg.options.mode = ThresholdMode::absolute;
      else if (m == "relative") cfg.options.mode = ThresholdMode::relative;
      else fail(source, line_no, "threshold_mode must be absolute or relative");
    } else if (key == "max_iterations") {
      cfg.options.max_iterations = number<std::size_t>(source, line_no, one());
    } else if (key == "pre_sweeps") {
      cfg.pre_sweeps = number<std::size_t>(source, line_no, one());
    } else if (key == "post_sweeps") {
      cfg.post_sweeps = number<std::size_t>(source, line_no, one());
    } else if (key == "output") {
      cfg.output_path = resolve(source, one());
    } else {
      fail(source, line_no, "unknown key '" + key + "'");
    }
  }
  if (cfg.spaces.empty()) fail(source, line_no, "no 'space' lines");
  if (!have_operator) fail(source, line_no, "missing 'operator' line");
  if (cfg.rhs_path.empty()) fail(source, line_no, "missing 'rhs' line");
  if (cfg.output_path.empty()) cfg.output_path = resolve(source, "solution.tensor");
  return cfg;
}

ProblemConfig load_problem_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path.string() + "'");
  return parse_problem_config(in, path);
}

Problem assemble_problem(const ProblemConfig& cfg) {
  auto registry = std::make_shared<SpaceRegistry>();
  for (const auto& s : cfg.spaces) registry->define_space(s.name, s.extent);
  RegistryPtr reg = registry;

  IndexSpec spec;
  if (!cfg.spec.empty()) {
    spec = parse_index_spec(*reg, cfg.spec);
  } else {
    for (std::size_t s = 0; s < reg->size(); ++s) {
      spec.push_back(up(s, 1));
      spec.push_back(down(s, 0));
    }
  }

  auto separable = [&]() -> SeparableOperator {
    if (cfg.op == OperatorKind::laplacian) return scaled(-1.0, laplacian(reg, spec));
    // Borrow the axis layout of the Laplacian spec, then put one kernel per axis.
    SeparableOperator shape = laplacian(reg, spec);
    SeparableOperator op(reg, shape.axes());
    std::vector<DenseTensor> factors;
    for (const auto& a : shape.axes())
      factors.push_back(convolution_1d(reg, a.space, {a.out_frame, a.in_frame}, cfg.kernel));
    op.add_term(1.0, factors);
    return op;
  };

  if (cfg.op == OperatorKind::dense) {
    if (cfg.solver == SolverKind::tmg) throw Error("solver tmg needs a separable operator, not a dense system");
    if (!std::filesystem::exists(cfg.dense_path))
      throw Error("system file '" + cfg.dense_path.string() + "' does not exist");
    LinearMap system(read_tensor(cfg.dense_path, reg));
    if (!std::filesystem::exists(cfg.rhs_path))
      throw Error("rhs file '" + cfg.rhs_path.string() + "' does not exist");
    DenseTensor rhs = read_tensor(cfg.rhs_path, reg);
    if (rhs.indices() != system.output_spec())
      throw ShapeError("rhs indices '" + rhs.spec_string() + "' do not match the system outputs '" +
                       print_index_spec(*reg, system.output_spec()) + "'");
    return {reg, std::move(system), std::move(rhs), false};
  }

  LinearMap system(separable());
  if (!std::filesystem::exists(cfg.rhs_path))
    throw Error("rhs file '" + cfg.rhs_path.string() + "' does not exist");
  DenseTensor rhs = read_tensor(cfg.rhs_path, reg);
  if (rhs.indices() != system.output_spec())
    throw ShapeError("rhs indices '" + rhs.spec_string() + "' do not match the system outputs '" +
                     print_index_spec(*reg, system.output_spec()) + "'");
  const bool negate = cfg.op == OperatorKind::laplacian;
  if (negate) rhs = -rhs;
  return {reg, std::move(system), std::move(rhs), negate};
}

SolveResult solve_problem(const Problem& problem, const ProblemConfig& config) {
  const LinearMap& a = problem.system;
  const DenseTensor u0 = a.zero_input();
  switch (config.solver) {
    case SolverKind::jacobi: return jacobi(a, problem.rhs, u0, config.options);
    case SolverKind::cg: return conjugate_gradients(a, problem.rhs, u0, config.options);
    case SolverKind::tmg: {
      if (!a.separable()) throw Error("solver tmg needs a separable operator");
      MultigridOptions mg;
      mg.pre_sweeps = config.pre_sweeps;
      mg.post_sweeps = config.post_sweeps;
      return tmg_solve(build_hierarchy(*a.separable(), mg), problem.rhs, u0, config.options);
    }
    case SolverKind::direct: break;
  }
  return solve_direct(a, problem.rhs);
}

}  // namespace tensalg
