#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, std::string* out = nullptr) {
  const fs::path capture = fs::temp_directory_path() / "potions_cli_stdout.txt";
  const std::string cmd =
      std::string(POTIONS_CLI) + " " + args + " > " + capture.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  if (out) {
    std::ifstream in(capture);
    std::stringstream buf;
    buf << in.rdbuf();
    *out = buf.str();
  }
  return WEXITSTATUS(status);
}

struct Scratch {
  fs::path dir = fs::temp_directory_path() / "potions_cli_test";
  Scratch() {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
  }
};

}  // namespace

TEST_CASE("exit codes for usage errors") {
  Scratch s;
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("simulate --no-such-flag") == 2);
  CHECK(run("experiment --config " + s.path("missing.json") + " --out " + s.path("o")) == 2);
  s.write("bad.json", R"({"family":"M7"})");
  CHECK(run("experiment --config " + s.path("bad.json") + " --out " + s.path("o")) == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("runtime failures exit 1") {
  Scratch s;
  s.write("iso.edges", "# n=3\n0 1\n");
  CHECK(run("simulate --graph " + s.path("iso.edges")) == 1);
}

TEST_CASE("generate, simulate, embed, resample") {
  Scratch s;
  const std::string g = s.path("g.edges");
  REQUIRE(run("generate --block 0.75,0.05,0.15 --connected --max-tries 10000000 --seed 4 --out " + g) == 0);
  std::string out;
  REQUIRE(run("simulate --graph " + g + " --seed 7 --until-discovery", &out) == 0);
  CHECK(std::count(out.begin(), out.end(), '\n') == 1);
  const auto j = nlohmann::json::parse(out);
  CHECK(j["censored"] == false);
  CHECK(j["final_scores"].size() == 24);
  std::string again;
  run("simulate --graph " + g + " --seed 7 --until-discovery", &again);
  CHECK(again == out);

  REQUIRE(run("embed --graph " + g + " --kind LSE --dim 2", &out) == 0);
  CHECK(std::count(out.begin(), out.end(), '\n') == 24);
  REQUIRE(run("resample --graph " + g + " --kind ASE --count 3 --seed 1 --max-tries 10000000 --out " +
              s.path("rs")) == 0);
  CHECK(fs::exists(s.dir / "rs" / "graph_0002.edges"));
  CHECK(fs::exists(s.dir / "rs" / "manifest.json"));
}

TEST_CASE("experiment and summarize") {
  Scratch s;
  s.write("m1.json", R"({"experiment":"m1","family":"M1","theta":[0,0.3],
                         "networks_per_theta":3,"max_tries":10000000})");
  const std::string out_dir = s.path("runs");
  REQUIRE(run("experiment --config " + s.path("m1.json") + " --seed 42 --out " + out_dir +
              " --jobs 2") == 0);
  CHECK(fs::exists(fs::path(out_dir) / "records.csv"));
  CHECK(fs::exists(fs::path(out_dir) / "manifest.json"));
  std::string summary;
  REQUIRE(run("summarize --records " + out_dir + "/records.csv", &summary) == 0);
  CHECK(std::count(summary.begin(), summary.end(), '\n') == 3);
}
