#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "tensalg/product.hpp"
#include "tensalg/separable.hpp"
#include "tensalg/tensor_io.hpp"

#ifndef TENSALG_CLI
#error "TENSALG_CLI must name the command-line binary"
#endif

using namespace tensalg;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

// stdout captured, stderr appended when `with_stderr`
Run run(const std::string& args, bool with_stderr = false) {
  const std::string cmd = std::string(TENSALG_CLI) + " " + args + (with_stderr ? " 2>&1" : " 2>/dev/null");
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

struct ScratchDir {
  fs::path path;
  ScratchDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("tensalg_cli_" + std::to_string(rd()));
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

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kWorked = "extents: X=2, Y=3, Z=4, T=5\nA : z^1,t^,z_\nB : y^1,y_\nC : x^1,x_\nT : x^,y^,z^,t_\n";

}  // namespace

TEST_CASE("solve: 16^3 Poisson with cg") {
  ScratchDir dir;
  auto w = make_registry({{"X", 16}, {"Y", 16}, {"Z", 16}});
  // b = L·u* for a known u*, so the solution can be checked
  std::mt19937_64 rng(5);
  std::vector<double> v(4096);
  for (auto& x : v) x = static_cast<double>(rng() % 1000) / 1000.0;
  const DenseTensor exact(w, "x^,y^,z^", v);
  const auto lap = laplacian(w, "x^1,x_,y^1,y_,z^1,z_");
  write_tensor(dir.path / "b.tensor", lap.apply(exact));
  const auto cfg = dir.file("p.cfg", "space X 16\nspace Y 16\nspace Z 16\noperator laplacian\nrhs b.tensor\nsolver cg\n"
                                     "threshold 1e-10\nthreshold_mode relative\nmax_iterations 1000\n");
  const auto r = run("solve " + cfg.string() + " --history " + (dir.path / "h.txt").string());
  CHECK(r.status == 0);
  CHECK(r.out.find("solver cg\n") != std::string::npos);
  CHECK(r.out.find("unknowns 4096\n") != std::string::npos);
  CHECK(r.out.find("status converged") != std::string::npos);
  const auto sol = read_tensor(dir.path / "solution.tensor", w);
  CHECK(max_abs_diff(sol, exact) <= 1e-4);
  CHECK(fs::file_size(dir.path / "h.txt") > 0);
}

TEST_CASE("solve: jacobi defaults and exit codes") {
  ScratchDir dir;
  auto w = make_registry({{"X", 6}});
  write_tensor(dir.path / "b.tensor", DenseTensor::constant(w, parse_index_spec(*w, "x^1"), 1.0));
  const auto cfg = dir.file("p.cfg", "space X 6\noperator laplacian\nrhs b.tensor\n");
  const auto ok = run("solve " + cfg.string());
  CHECK(ok.status == 0);
  CHECK(ok.out.find("solver jacobi\n") != std::string::npos);
  CHECK(ok.out.find("status converged") != std::string::npos);

  const auto capped = dir.file("c.cfg", "space X 6\noperator laplacian\nrhs b.tensor\nmax_iterations 3\n");
  const auto nc = run("solve " + capped.string());
  CHECK(nc.status == 2);
  CHECK(nc.out.find("status not converged after 3 iterations") != std::string::npos);

  const auto missing = dir.file("m.cfg", "space X 6\noperator laplacian\nrhs gone.tensor\n");
  const auto bad = run("solve " + missing.string(), true);
  CHECK(bad.status == 1);
  CHECK(bad.out.find((dir.path / "gone.tensor").string()) != std::string::npos);
  fs::remove(dir.path / "solution.tensor");
  CHECK(run("solve " + missing.string()).status == 1);
  CHECK_FALSE(fs::exists(dir.path / "solution.tensor"));

  CHECK(run("solve " + (dir.path / "none.cfg").string()).status == 1);
}

TEST_CASE("bench-contraction") {
  ScratchDir dir;
  const auto expr = dir.file("worked.expr", kWorked);
  const auto r = run("bench-contraction " + expr.string());
  CHECK(r.status == 0);
  CHECK(r.out.rfind("optimal C·(B·(A·T))\n", 0) == 0);
  CHECK(r.out.find("total_flops 600 ") != std::string::npos);
  CHECK(r.out.find("mode exhaustive") != std::string::npos);
  CHECK(r.out.find("mode fixed") != std::string::npos);

  const auto ex = run("bench-contraction " + expr.string() + " --execute --random-seed 7");
  CHECK(ex.status == 0);
  CHECK(ex.out.find("relative_discrepancy") != std::string::npos);
  CHECK(ex.out.find(" ok\n") != std::string::npos);

  const auto single = run("bench-contraction " + dir.file("one.expr", "extent X 2\nA : x^,x_1\n").string());
  CHECK(single.status == 0);
  CHECK(single.out == "nothing to plan\n");

  CHECK(run("bench-contraction " + dir.file("bad.expr", "extent X 2\nA : q^\n").string()).status == 1);
}

TEST_CASE("demo-recon output is deterministic") {
  ScratchDir dir;
  const std::string args = "demo-recon --grid 17 --samples 60 --seed 3 --solver cg --output ";
  const auto a = run(args + (dir.path / "a").string());
  const auto b = run(args + (dir.path / "b").string());
  CHECK(a.status == 0);
  CHECK(b.status == 0);
  CHECK(slurp(dir.path / "a.tensor") == slurp(dir.path / "b.tensor"));
  CHECK(slurp(dir.path / "a.pgm") == slurp(dir.path / "b.pgm"));
  CHECK(slurp(dir.path / "a.pgm").rfind("P2\n17 17\n255\n", 0) == 0);
  CHECK(run("demo-recon --solver magic --output " + (dir.path / "c").string()).status == 1);
}
