#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

fs::path Work() {
  const char* env = std::getenv("MCSE_TEST_TMP");
  fs::path dir = env != nullptr ? fs::path(env) : fs::temp_directory_path() / "mcse_cli_test";
  fs::create_directories(dir);
  return dir;
}

int Run(const std::string& args) {
  const std::string cmd = std::string("\"") + MCSE_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string Q(const fs::path& p) { return "\"" + p.string() + "\""; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("synth, simulate, enhance and evaluate") {
  const fs::path root = Work() / "flow";
  fs::remove_all(root);
  REQUIRE(Run("synth --out " + Q(root / "src") + " --count 3 --noise-count 1 --duration 1.5 --seed 3") == 0);
  CHECK(fs::exists(root / "src" / "speech.txt"));

  const std::string sim = "simulate --speech " + Q(root / "src" / "speech.txt") + " --noise " +
                          Q(root / "src" / "noise.txt") + " --count 2 --seed 42 --write-masks";
  REQUIRE(Run(sim + " --out " + Q(root / "sim_a")) == 0);
  REQUIRE(Run(sim + " --workers 2 --out " + Q(root / "sim_b")) == 0);
  CHECK(Slurp(root / "sim_a" / "manifest.jsonl") == Slurp(root / "sim_b" / "manifest.jsonl"));
  CHECK(Slurp(root / "sim_a" / "utt00001" / "mixture.wav") ==
        Slurp(root / "sim_b" / "utt00001" / "mixture.wav"));

  const std::string man = Q(root / "sim_a" / "manifest.jsonl");
  REQUIRE(Run("enhance --manifest " + man + " --arch sep_only --out " + Q(root / "enh")) == 0);
  CHECK(fs::exists(root / "enh" / "utt00000.wav"));
  CHECK(fs::exists(root / "enh" / "config.json"));
  REQUIRE(Run("enhance --manifest " + man + " --arch sep_only --masks " + Q(root / "sim_a" / "masks") +
              " --out " + Q(root / "enh_masks")) == 0);

  const std::string eval = "evaluate --manifest " + Q(root / "enh" / "manifest.jsonl");
  REQUIRE(Run(eval + " --out " + Q(root / "report.jsonl")) == 0);
  const std::string report = Slurp(root / "report.jsonl");
  CHECK(report.find("\"aggregate\"") != std::string::npos);
  CHECK(report.find("utt00001") != std::string::npos);
  CHECK(Run(eval + " --min-stoi 1.5") == 3);
  CHECK(Run(eval + " --min-stoi 0.0") == 0);
}

TEST_CASE("usage and input errors") {
  const fs::path root = Work() / "errors";
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "empty.txt").close();
  CHECK(Run("simulate --speech " + Q(root / "empty.txt") + " --out " + Q(root / "o")) != 0);
  CHECK(Run("enhance --manifest " + Q(root / "empty.txt") + " --arch nonsense --out " + Q(root / "o")) != 0);
  CHECK(Run("") != 0);
  CHECK(Run("bogus") != 0);
  CHECK(Run("--version") == 0);
}

}
