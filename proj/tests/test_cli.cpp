#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  std::string cmd = std::string(ESUM_CLI) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  while (size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  int st = pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch() {
  fs::path d = fs::temp_directory_path() / ("esum_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("verify eq124 exits 0") {
  Run r = run("verify eq124 --digits 40");
  CHECK(r.code == 0);
  CHECK(r.out.find("pass") != std::string::npos);
}

TEST_CASE("lookup and usage errors exit 2") {
  CHECK(run("verify nosuch").code == 2);
  CHECK(run("verify eq124 --bogus").code == 2);
  CHECK(run("eval 'H / k'").code == 2);
  CHECK(run("").code == 2);
}

TEST_CASE("a failing entry exits 1 and still writes the report") {
  fs::path d = scratch();
  std::ofstream(d / "cat.json") << R"([{"id":"eq1","kind":"infinite-identity","family":"1","lhs":"S[H / k^2]",)"
                                   R"("rhs":"z3","class":"A","status":"core"}])";
  fs::path out = d / "report.jsonl";
  Run r = run("verify-all --catalog " + (d / "cat.json").string() + " --format jsonl -o " + out.string());
  CHECK(r.code == 1);
  std::string rep = slurp(out);
  CHECK(rep.find("\"verdict\":\"fail\"") != std::string::npos);
  fs::remove_all(d);
}

TEST_CASE("jsonl reports are byte-identical without timing") {
  Run a = run("verify eq3 eq50 --format jsonl --no-timing");
  Run b = run("verify eq3 eq50 --format jsonl --no-timing");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("lemmas, eval, constants, discover") {
  Run l = run("lemmas --kmax 500");
  CHECK(l.code == 0);
  CHECK(l.out.find("6 records: 6 pass") != std::string::npos);
  Run e = run("eval 'H / k^2' --digits 30");
  CHECK(e.code == 0);
  CHECK(e.out.find("2.404113806319188570799476323") != std::string::npos);
  Run c = run("constants --digits 20");
  CHECK(c.code == 0);
  CHECK(c.out.find("mzv331") != std::string::npos);
  Run q = run("discover 'h^3 / k^2' --weight 5");
  CHECK(q.code == 0);
  CHECK(q.out.find("21/8*z2*z3") != std::string::npos);
}
