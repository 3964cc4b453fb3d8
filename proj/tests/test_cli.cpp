#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "helpers.hpp"
#include "json.hpp"
#include "wbary/io.hpp"

using namespace wbary;
using namespace wbary::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  json summary;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(WBARY_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (!r.out.empty()) r.summary = json::parse(r.out, nullptr, false);
  return r;
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "wbary_test_cli";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path three_dirac_instance() {
  const fs::path p = scratch() / "three.json";
  io::write_instance(p, three_diracs());
  return p;
}

}  // namespace

TEST_CASE("barycenter command") {
  const fs::path inst = three_dirac_instance();
  const fs::path out = scratch() / "bary.json";

  const Run s2 = run("barycenter " + inst.string() + " --algorithm s2-enum --t 3 --out " + out.string());
  CHECK(s2.code == 0);
  CHECK(s2.summary["value"].get<double>() == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(s2.summary["termination"] == "optimal");
  const DiscreteMeasure m = io::read_measure(out);
  REQUIRE(m.size() == 1);
  CHECK(m.atom(0)[0] == 1.0);

  const Run s1 = run("barycenter " + inst.string() + " --algorithm s1-enum --t 1");
  CHECK(s1.code == 0);
  CHECK(s1.summary["value"].get<double>() == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(s1.summary["support_size"] == 3);
  CHECK(s1.summary["ratio_bound"].get<double>() == 2.0);

  const Run colgen = run("barycenter " + inst.string() + " --algorithm s1-enum --t 2 --mode colgen");
  CHECK(colgen.code == 0);
  CHECK(colgen.summary["mode"] == "colgen");

  CHECK(run("barycenter " + inst.string() + " --algorithm s1-sample --t 2").code == 1);
  const Run sampled = run("barycenter " + inst.string() + " --algorithm s1-sample --t 2 --seed 5");
  CHECK(sampled.code == 0);
  CHECK(sampled.summary["sampled_indices"].size() == 2);

  CHECK(run("barycenter " + inst.string() + " --algorithm s1-enum --t 9").code == 1);
  CHECK(run("barycenter " + inst.string() + " --algorithm s1-enum --t 2 --max-atoms 2").code == 1);
  CHECK(run("barycenter " + (scratch() / "nope.json").string()).code == 1);
  CHECK(run("barycenter " + inst.string() + " --bogus").code == 1);
}

TEST_CASE("hybrid expands a previous barycenter") {
  const fs::path inst = three_dirac_instance();
  const fs::path base = scratch() / "base.json";
  io::write_measure(base, dirac({1.0}));
  const Run r = run("barycenter " + inst.string() + " --algorithm hybrid --base " + base.string() +
                    " --neighbors 1");
  CHECK(r.code == 0);
  CHECK(r.summary["support_size"] == 5);
}

TEST_CASE("exact and distance commands") {
  const fs::path inst = three_dirac_instance();
  const Run e = run("exact " + inst.string());
  CHECK(e.code == 0);
  CHECK(e.summary["value"].get<double>() == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  const fs::path a = scratch() / "a.json", b = scratch() / "b.json";
  io::write_measure(a, line_measure({0.0, 2.0}, {0.5, 0.5}));
  io::write_measure(b, dirac({1.0}));
  const Run d = run("distance " + a.string() + " " + b.string());
  CHECK(d.code == 0);
  CHECK(d.summary["w2_squared"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(run("distance " + a.string() + " " + a.string()).summary["w2_squared"].get<double>() ==
        doctest::Approx(0.0));
}

TEST_CASE("classify command") {
  const fs::path dir = scratch();
  io::write_measure(dir / "c0.json", dirac({0.0}));
  io::write_measure(dir / "c10.json", dirac({10.0}));
  io::write_measure(dir / "t1.json", dirac({1.0}));
  io::write_measure(dir / "t5.json", dirac({5.0}));
  io::write_measure(dir / "t10.json", dirac({10.0}));
  const std::string classes = " --class " + (dir / "c0.json").string() + " --class " + (dir / "c10.json").string();

  const Run r = run("classify" + classes + " --test " + (dir / "t1.json").string() + " --test " +
                    (dir / "t10.json").string() + " --test " + (dir / "t5.json").string() +
                    " --label 0 --label 1 --label 1 --out " + (dir / "cls.csv").string());
  CHECK(r.code == 0);
  const auto& items = r.summary["assignments"];
  REQUIRE(items.size() == 3);
  CHECK(items[0]["assigned"] == 0);
  CHECK(items[0]["tie"] == false);
  CHECK(items[1]["assigned"] == 1);
  CHECK(items[1]["distance"].get<double>() == doctest::Approx(0.0));
  CHECK(items[2]["assigned"] == 0);
  CHECK(items[2]["tie"] == true);
  CHECK(r.summary["ties"] == 1);
  CHECK(r.summary["accuracy"].get<double>() == doctest::Approx(2.0 / 3.0));
  CHECK(r.summary["confusion"] == json::parse("[[1,0],[1,1]]"));
  CHECK(slurp(dir / "cls.csv").rfind("test,assigned,distance,tie,label\n", 0) == 0);

  CHECK(run("classify --class " + (dir / "c0.json").string() + " --test " + (dir / "t1.json").string()).code == 1);
  io::write_measure(dir / "p2.json", dirac({1.0, 1.0}));
  CHECK(run("classify" + classes + " --test " + (dir / "p2.json").string()).code == 1);
}

TEST_CASE("render command") {
  const fs::path dir = scratch();
  io::write_measure(dir / "center.json", dirac({0.5, 0.5}));
  const Run r = run("render " + (dir / "center.json").string() + " --out " + (dir / "c.pgm").string() +
                    " --grid 3");
  CHECK(r.code == 0);
  const io::GrayImage img = io::read_gray_image(dir / "c.pgm");
  REQUIRE(img.pixels.size() == 9);
  CHECK(img.pixels[4] == 1.0);
  CHECK(img.pixels[0] == 0.0);
}

TEST_CASE("seeded commands are byte-for-byte repeatable") {
  const fs::path dir = scratch();
  for (int rep = 0; rep < 2; ++rep) {
    const std::string p = (dir / ("ratio" + std::to_string(rep))).string();
    CHECK(run("bench ratio --instances 2 --k 3 --n 2 --t 1,2 --seed 9 --out " + p).code == 0);
    const std::string inst = three_dirac_instance().string();
    CHECK(run("barycenter " + inst + " --algorithm s2-sample --t 2 --seed 3 --out " +
              (dir / ("s2_" + std::to_string(rep) + ".json")).string()).code == 0);
  }
  CHECK(slurp(dir / "ratio0.csv") == slurp(dir / "ratio1.csv"));
  CHECK(slurp(dir / "ratio0_summary.csv") == slurp(dir / "ratio1_summary.csv"));
  CHECK(slurp(dir / "s2_0.json") == slurp(dir / "s2_1.json"));
  CHECK_FALSE(slurp(dir / "ratio0.csv").empty());
}
