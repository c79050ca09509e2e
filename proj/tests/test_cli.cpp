#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "ekb/cli.hpp"
#include "ekb/io.hpp"
#include "support.hpp"

using namespace ekb;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "ekb");
  std::vector<std::string_view> views(args.begin(), args.end());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(views, out, err);
  return {code, out.str(), err.str()};
}

struct Workdir {
  fs::path root;
  Workdir() : root(fs::temp_directory_path() / "ekb_cli_test") {
    fs::remove_all(root);
    fs::create_directories(root);
    write_text(path("friend.kb"), testing::kFriendKbText);
    write_text(path("empty.kb"), "# nothing\n");
    write_text(path("other.kb"), "likes\tA\tB\t+\n");
  }
  ~Workdir() { fs::remove_all(root); }
  [[nodiscard]] std::string path(const std::string& name) const { return (root / name).string(); }
};

}  // namespace

TEST_CASE("cli fit, query, report, aggregate") {
  const Workdir w;
  const std::string ens = w.path("friend.json");
  Run fit = run({"fit", w.path("friend.kb"), "-o", ens, "--seed", "7", "--members", "8"});
  REQUIRE(fit.code == 0);
  CHECK(fs::exists(ens));
  CHECK(fs::exists(ens + ".manifest.json"));
  CHECK(load_ensemble(ens).size() == 8);

  Run q = run({"query", ens, "friend", "Joe", "Bob"});
  CHECK(q.code == 0);
  CHECK(q.out == "TRUE\t1.000000\n");
  CHECK(q.err.rfind("manifest: ", 0) == 0);

  q = run({"query", ens, "friend", "Mary", "John", "--kb", w.path("friend.kb")});
  CHECK(q.code == 0);
  CHECK(q.out == "FALSE\t0.000000\n");

  q = run({"query", ens, "friend", "Joe", "Zed"});
  CHECK(q.code == 1);
  CHECK(q.out.empty());
  CHECK(q.err.find("Zed") != std::string::npos);

  q = run({"query", ens, "friend", "Joe", "Bob", "--kb", w.path("other.kb")});
  CHECK(q.code == 1);

  Run rep = run({"report", ens, w.path("friend.kb")});
  CHECK(rep.code == 0);
  CHECK(rep.out.rfind("# members=8 asserted=3 consistent=3 unstated=17 ", 0) == 0);
  CHECK(std::count(rep.out.begin(), rep.out.end(), '\n') == 2 + 3 + 17);

  rep = run({"report", ens, w.path("friend.kb"), "--self-pairs"});
  CHECK(rep.code == 0);
  CHECK(std::count(rep.out.begin(), rep.out.end(), '\n') == 2 + 3 + 22);

  rep = run({"report", ens, w.path("other.kb")});
  CHECK(rep.code == 1);

  const std::string agg = w.path("friend.agg.json");
  Run a = run({"aggregate", ens, "-o", agg, "--clouds", w.path("clouds.tsv")});
  CHECK(a.code == 0);
  CHECK(fs::exists(agg));
  CHECK(fs::exists(w.path("clouds.tsv")));

  a = run({"aggregate", ens, "-o", agg, "--dedup-tol", "1e9"});
  CHECK(a.code == 2);
}

TEST_CASE("cli manifests and repeatability") {
  const Workdir w;
  const std::string a = w.path("a.json");
  const std::string b = w.path("b.json");
  REQUIRE(run({"fit", w.path("friend.kb"), "-o", a, "--seed", "3", "--members", "4"}).code == 0);
  REQUIRE(run({"--manifest", w.path("b.manifest"), "fit", w.path("friend.kb"), "-o", b, "--seed", "3", "--members",
               "4", "--jobs", "3"})
              .code == 0);
  CHECK(read_text(a) == read_text(b));
  const json m = json::parse(read_text(w.path("b.manifest")));
  CHECK(m.at("kb_digest") == testing::friend_kb().digest());
  CHECK(m.contains("rng_algorithm"));
}

TEST_CASE("cli empty KB report has only header lines") {
  const Workdir w;
  const std::string ens = w.path("empty.json");
  REQUIRE(run({"fit", w.path("empty.kb"), "-o", ens, "--seed", "1", "--members", "2"}).code == 0);
  const Run rep = run({"report", ens, w.path("empty.kb")});
  CHECK(rep.code == 0);
  CHECK(rep.out ==
        "# members=2 asserted=0 consistent=0 unstated=0 true=0 false=0 unknown=0\n"
        "# relation\tsubject\tobject\tverdict\tfraction\n");
}

TEST_CASE("cli input errors") {
  const Workdir w;
  CHECK(run({}).code == 1);
  CHECK(run({"bogus"}).code == 1);
  CHECK(run({"fit", w.path("friend.kb"), "-o", w.path("x.json")}).code == 1);
  CHECK(run({"fit", w.path("friend.kb"), "-o", w.path("x.json"), "--seed", "1", "--members", "0"}).code == 1);
  const Run missing = run({"fit", w.path("nope.kb"), "-o", w.path("x.json"), "--seed", "1"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("nope.kb") != std::string::npos);
  write_text(w.path("bad.kb"), "friend\tA\tB\t+\nfriend\tA\tB\t-\n");
  const Run bad = run({"fit", w.path("bad.kb"), "-o", w.path("x.json"), "--seed", "1"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("2") != std::string::npos);
  const Run version = run({"--version"});
  CHECK(version.code == 0);
  CHECK(version.out.find(std::string(cli::kToolVersion)) != std::string::npos);
}

TEST_CASE("cli unsatisfiable KB exits with a compute error") {
  const Workdir w;
  write_text(w.path("unsat.kb"), "p\ta\tb\t+\nq\ta\tb\t+\np\tc\td\t+\nq\tc\td\t-\n");
  const Run r = run({"fit", w.path("unsat.kb"), "-o", w.path("u.json"), "--seed", "1", "--members", "2"});
  CHECK(r.code == 2);
  CHECK_FALSE(fs::exists(w.path("u.json")));
}
