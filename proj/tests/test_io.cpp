#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "tensalg/error.hpp"
#include "tensalg/problem_config.hpp"
#include "tensalg/tensor_io.hpp"

using namespace tensalg;
namespace fs = std::filesystem;

namespace {

struct ScratchDir {
  fs::path path;
  ScratchDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("tensalg_io_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  fs::path file(const std::string& name, const std::string& content) const {
    const auto p = path / name;
    std::ofstream(p) << content;
    return p;
  }
};

std::string parse_error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_tensor(in, "t.tensor");
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("tensor files round-trip bit for bit") {
  std::mt19937_64 rng(11);
  ScratchDir dir;
  auto w = make_registry({{"X", 3}, {"Y", 4}, {"Z", 2}});
  for (const char* spec : {"x^,y_", "x^1,y^,z_3", "z^", "", "x^,x_,y^2,z^"}) {
    auto t = oracle::random_tensor(w, parse_index_spec(*w, spec), rng);
    t.data()[0] = 1.0 / 3.0;
    const auto p = dir.path / "t.tensor";
    write_tensor(p, t);
    const auto back = read_tensor(p, w);
    CHECK(back == t);
    CHECK(back.registry() == w);
    const auto fresh = read_tensor(p);
    CHECK(fresh.spec_string() == t.spec_string());
    CHECK(std::equal(fresh.data().begin(), fresh.data().end(), t.data().begin()));
    CHECK(format_tensor(fresh) == format_tensor(t));
  }
  CHECK_FALSE(fs::exists(dir.path / "t.tensor.tmp"));
}

TEST_CASE("tensor file layout") {
  auto w = make_registry({{"X", 2}, {"Y", 3}});
  const DenseTensor t(w, "y_,x^", {1, 2, 3, 4, 5, 6});
  CHECK(format_tensor(t) ==
        "tensorfile 1\nspace X 2\nspace Y 3\nindices x^,y_\ndata\n1 3 5\n2 4 6\n");
  CHECK(format_double(0.1) == "0.10000000000000001");
  const DenseTensor s(w, "", {2.5});
  std::istringstream in(format_tensor(s));
  CHECK(parse_tensor(in, "s").value() == 2.5);
}

TEST_CASE("tensor file errors carry file and line") {
  const std::string head = "tensorfile 1\nspace X 3\nspace Y 4\nindices x^,y^\ndata\n";
  std::string eleven;
  for (int i = 0; i < 11; ++i) eleven += std::to_string(i) + " ";
  CHECK(parse_error_of(head + eleven + "\n") == "t.tensor:6: expected 12 components, found 11");
  CHECK(parse_error_of("tensorfile 2\n").find("t.tensor:1:") == 0);
  CHECK(parse_error_of(head + "1 2 x\n").find("t.tensor:6: bad number 'x'") == 0);
  CHECK(parse_error_of("tensorfile 1\nspace X 3\nindices q^\ndata\n").find("t.tensor:3:") == 0);
  CHECK(parse_error_of("tensorfile 1\nspace X 3\nspace X 4\n").find("t.tensor:3:") == 0);
  CHECK(parse_error_of("tensorfile 1\nspace X 3\nindices x^\n").find("expected 'data'") != std::string::npos);

  auto other = make_registry({{"X", 5}});
  std::istringstream in("tensorfile 1\nspace X 3\nindices x^\ndata\n1 2 3\n");
  CHECK_THROWS_AS(parse_tensor(in, "t", other), ParseError);
  CHECK_THROWS_AS(read_tensor("/nonexistent/t.tensor"), Error);
}

TEST_CASE("problem config parsing") {
  ScratchDir dir;
  const auto cfg_path = dir.file("p.cfg",
                                 "# poisson\n"
                                 "space X 4\nspace Y 3   # trailing comment\n"
                                 "operator laplacian\n"
                                 "rhs b.tensor\n"
                                 "solver cg\nthreshold 1e-10\nthreshold_mode relative\n"
                                 "max_iterations 77\n");
  const auto cfg = load_problem_config(cfg_path);
  CHECK(cfg.spaces.size() == 2);
  CHECK(cfg.spaces[1].extent == 3);
  CHECK(cfg.solver == SolverKind::cg);
  CHECK(cfg.options.threshold == 1e-10);
  CHECK(cfg.options.mode == ThresholdMode::relative);
  CHECK(cfg.options.max_iterations == 77);
  CHECK(cfg.rhs_path == dir.path / "b.tensor");
  CHECK(cfg.output_path == dir.path / "solution.tensor");

  std::istringstream defaults("space X 4\noperator convolution 1 2 1\nrhs /abs/b.tensor\n");
  const auto d = parse_problem_config(defaults, "d.cfg");
  CHECK(d.solver == SolverKind::jacobi);
  CHECK(d.options.threshold == 1e-4);
  CHECK(d.kernel == std::vector<double>{1, 2, 1});
  CHECK(d.rhs_path == fs::path("/abs/b.tensor"));

  auto err = [](const std::string& text) -> std::string {
    std::istringstream in(text);
    try {
      parse_problem_config(in, "c.cfg");
    } catch (const ParseError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(err("space X 4\noperator laplacian\nrhs b\nsolver magic\n") == "c.cfg:4: unknown solver 'magic'");
  CHECK(err("space X 4\noperator convolution 1 2\nrhs b\n").find("c.cfg:2:") == 0);
  CHECK(err("space X 4\nrhs b\n").find("missing 'operator'") != std::string::npos);
  CHECK(err("space X 4\noperator laplacian\n").find("missing 'rhs'") != std::string::npos);
  CHECK(err("space X four\n") == "c.cfg:1: bad number 'four'");
  CHECK_THROWS_AS(load_problem_config(dir.path / "missing.cfg"), Error);
}

TEST_CASE("problem assembly and solve") {
  ScratchDir dir;
  auto w = make_registry({{"X", 4}, {"Y", 3}});
  write_tensor(dir.path / "b.tensor", DenseTensor::constant(w, parse_index_spec(*w, "x^1,y^1"), 1.0));
  const auto cfg = load_problem_config(dir.file("p.cfg", "space X 4\nspace Y 3\noperator laplacian\nrhs b.tensor\nsolver direct\n"));
  const auto problem = assemble_problem(cfg);
  CHECK(problem.negated);
  CHECK(problem.system.is_separable());
  CHECK(problem.rhs.data()[0] == -1.0);
  const auto sol = solve_problem(problem, cfg);
  CHECK(sol.report.converged);
  // the original (unnegated) Laplacian maps the solution back to the file's rhs
  const auto lap = laplacian(problem.registry, "x^1,x_,y^1,y_");
  CHECK(max_abs_diff(lap.apply(sol.solution), -problem.rhs) <= 1e-12);

  for (const char* solver : {"jacobi", "cg", "tmg"}) {
    auto c = cfg;
    std::istringstream in(std::string("space X 4\nspace Y 3\noperator laplacian\nrhs b.tensor\nthreshold 1e-20\nmax_iterations 2000\nsolver ") + solver + "\n");
    c = parse_problem_config(in, dir.path / "p.cfg");
    const auto r = solve_problem(assemble_problem(c), c);
    CHECK(max_abs_diff(r.solution, sol.solution) <= 1e-8);
  }

  const auto missing = load_problem_config(dir.file("m.cfg", "space X 4\noperator laplacian\nrhs nowhere.tensor\n"));
  try {
    assemble_problem(missing);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find((dir.path / "nowhere.tensor").string()) != std::string::npos);
  }

  write_tensor(dir.path / "a.tensor", DenseTensor(w, "x^1,x_", {2, -1, 0, 0, -1, 2, -1, 0, 0, -1, 2, -1, 0, 0, -1, 2}));
  write_tensor(dir.path / "b1.tensor", DenseTensor(w, "x^1", {1, 0, 0, 1}));
  const auto dense_cfg = load_problem_config(dir.file("d.cfg", "space X 4\nspace Y 3\noperator dense a.tensor\nrhs b1.tensor\nsolver cg\nthreshold 1e-24\n"));
  const auto dense = assemble_problem(dense_cfg);
  CHECK_FALSE(dense.system.is_separable());
  const auto ds = solve_problem(dense, dense_cfg);
  for (std::size_t i = 0; i < 4; ++i) CHECK(ds.solution({i}) == doctest::Approx(1.0).epsilon(1e-10));
  auto tmg_cfg = dense_cfg;
  tmg_cfg.solver = SolverKind::tmg;
  CHECK_THROWS_AS(assemble_problem(tmg_cfg), Error);
}
