#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "homogbench/io.hpp"

using namespace homog;

namespace {

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct TempFile {
  std::string path;
  explicit TempFile(const char* name)
      : path(std::string("/tmp/homogbench_test_") + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("pfgrid round trip, multi-component 2D field") {
  PeriodicField f(2, 8, 3);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (double& v : f.mutable_data()) v = u(rng);

  TempFile tf("roundtrip.pfgrid");
  io::write_pfgrid(tf.path, f);
  PeriodicField g = io::to_field(io::read_pfgrid(tf.path));
  REQUIRE(g.dim() == 2);
  REQUIRE(g.n() == 8);
  REQUIRE(g.comps() == 3);
  for (std::size_t i = 0; i < f.data().size(); ++i)
    CHECK(g.data()[i] == f.data()[i]);  // exact binary round trip
}

TEST_CASE("pfgrid header validation") {
  TempFile tf("bad.pfgrid");
  {
    std::ofstream out(tf.path, std::ios::binary);
    out << "NOTPF 1 1 4 1\n";
  }
  CHECK_THROWS_AS(io::read_pfgrid(tf.path), Error);
  {
    std::ofstream out(tf.path, std::ios::binary);
    out << "PFGRID 1 1 4 1\n";
    double v = 0.0;  // only one of four payload values
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  CHECK_THROWS_AS(io::read_pfgrid(tf.path), Error);
}

TEST_CASE("csv output is deterministic and full precision") {
  std::vector<std::string> header = {"x", "y"};
  std::vector<std::vector<double>> rows = {
      {0.1, 1.0 / 3.0}, {1e-300, 12345.6789012345678}};
  TempFile a("a.csv"), b("b.csv");
  io::write_csv(a.path, header, rows);
  io::write_csv(b.path, header, rows);
  std::string sa = read_all(a.path);
  CHECK(sa == read_all(b.path));  // byte identical on re-run
  CHECK(sa.find("x,y\n") == 0);
  CHECK(sa.find("0.33333333333333331") != std::string::npos);
  // round trip through the printed representation is exact
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(std::stod(io::format_double(1e-300)) == 1e-300);
}

TEST_CASE("rate report json fragment") {
  RateReport r;
  r.points = {{0.5, 0.25}, {0.25, 0.0625}};
  r.slope = 2.0;
  r.intercept = 0.0;
  r.r2 = 1.0;
  r.experiment = "demo";
  auto j = io::to_json(r);
  CHECK(j["slope"] == 2.0);
  CHECK(j["experiment"] == "demo");
  CHECK(j["points"].size() == 2);
  CHECK(j["points"][0][0] == 0.5);
}

TEST_CASE("effective tensor json fragment") {
  EffectiveTensor T;
  T.dim = 1;
  T.m = 1;
  T.entries = {1.5};
  T.provenance = "average";
  T.ell_lo = 1.5;
  T.ell_hi = 1.5;
  auto j = io::to_json(T);
  CHECK(j["entries"][0] == 1.5);
  CHECK(j["ellipticity"][0] == 1.5);
  CHECK(j["provenance"] == "average");

  TempFile tf("tensor.json");
  io::write_json(tf.path, j);
  auto back = nlohmann::json::parse(read_all(tf.path));
  CHECK(back == j);
}

TEST_CASE("domain solution writer stores the full grid including boundary") {
  DomainGrid g{1, 6};
  DomainSolution u;
  u.grid = g;
  u.values.resize(g.full_nodes());
  for (int i = 0; i < int(u.values.size()); ++i) u.values[i] = i;
  TempFile tf("dom.pfgrid");
  io::write_pfgrid(tf.path, u);
  auto raw = io::read_pfgrid(tf.path);
  CHECK(raw.n == g.N + 2);
  CHECK(raw.data.front() == 0.0);
  CHECK(raw.data.back() == double(g.N + 1));
}
