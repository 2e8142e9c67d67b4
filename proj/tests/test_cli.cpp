#include "tubeflow/acceptance.hpp"
#include "tubeflow/experiments.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace tubeflow;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("tubeflow_cli_" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return path / name;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

const char* kCone = R"([experiment]
kind = certify
seed = 11

[potential]
name = cone2d

[samples]
kind = random
count = 40
lo = 0.2 -2
hi = 3 2

[certify]
quantity = ABC
expect = %EXPECT%

[output]
dir = out
name = cone
)";

std::string cone(const std::string& expect) {
    std::string s = kCone;
    s.replace(s.find("%EXPECT%"), 8, expect);
    return s;
}

int run(const fs::path& p, std::string* out_text = nullptr) {
    std::ostringstream out, err;
    int code = run_config(p, out, err);
    if (out_text) *out_text = out.str();
    return code;
}

}  // namespace

TEST_CASE("passing certificate exits 0 and writes the verdict") {
    TempDir d;
    std::string out;
    CHECK(run(d.write("a.ini", cone("NONPOSITIVE")), &out) == 0);
    CHECK(out.rfind("PASS", 0) == 0);
    std::string cert = slurp(d.path / "out" / "cone.cert");
    CHECK(cert.find("NONPOSITIVE") != std::string::npos);
    CHECK(fs::exists(d.path / "out" / "cone.log"));
}

TEST_CASE("expectation mismatch exits 1") {
    TempDir d;
    std::string out;
    CHECK(run(d.write("a.ini", cone("NONNEGATIVE")), &out) == 1);
    CHECK(out.find("FAIL") != std::string::npos);
}

TEST_CASE("config errors exit 2") {
    TempDir d;
    std::string bad_name = cone("NONPOSITIVE");
    bad_name.replace(bad_name.find("cone2d"), 6, "no_such_potential");
    CHECK(run(d.write("a.ini", bad_name)) == 2);

    std::string no_section = cone("NONPOSITIVE");
    no_section.erase(no_section.find("[potential]"), std::string("[potential]\nname = cone2d\n").size());
    CHECK(run(d.write("b.ini", no_section)) == 2);

    std::string bad_kind = cone("NONPOSITIVE");
    bad_kind.replace(bad_kind.find("certify\n"), 7, "unknown");
    CHECK(run(d.write("c.ini", bad_kind)) == 2);

    std::string stray_key = cone("NONPOSITIVE");
    stray_key.insert(stray_key.find("[samples]\n") + 10, "bogus = 1\n");
    CHECK(run(d.write("d.ini", stray_key)) == 2);

    CHECK(run(d.path / "missing.ini") == 2);
}

TEST_CASE("trace suite report") {
    TempDir d;
    fs::path p = d.write("t.ini", "[experiment]\nkind = trace-suite\nseed = 3\n\n[suite]\ntrials = 200\nn_max = 4\n\n"
                                  "[output]\ndir = out\nname = trace\n");
    CHECK(run(p) == 0);
    std::string rep = slurp(d.path / "out" / "trace.report");
    CHECK(rep.find("min_value = ") != std::string::npos);
    CHECK(rep.find("trials = 200") != std::string::npos);
}

TEST_CASE("runs are byte-for-byte repeatable") {
    TempDir d;
    std::string scan = R"([experiment]
kind = curvature-scan
seed = 4

[potential]
name = calabi_ball

[samples]
kind = grid
per_dim = 5
lo = -0.5 -0.5
hi = 0.5 0.5

[output]
dir = %DIR%
name = scan
)";
    std::string a = scan, b = scan;
    a.replace(a.find("%DIR%"), 5, "one");
    b.replace(b.find("%DIR%"), 5, "two");
    REQUIRE(run(d.write("a.ini", a)) == 0);
    REQUIRE(run(d.write("b.ini", b)) == 0);
    std::string one = slurp(d.path / "one" / "scan.csv");
    CHECK_FALSE(one.empty());
    CHECK(one == slurp(d.path / "two" / "scan.csv"));
}

TEST_CASE("catalog listing") {
    std::ostringstream out;
    print_catalog(out);
    std::string s = out.str();
    int lines = 0;
    for (char c : s) lines += c == '\n';
    CHECK(lines >= 7);
    for (const char* name : {"cone2d", "calabi_ball", "bidisk_product", "radial_sym", "quadratic_plus_periodic"})
        CHECK(s.find(name) != std::string::npos);
}

TEST_CASE("shipped configs parse and name known kinds") {
    int count = 0;
    for (const auto& e : fs::directory_iterator(TUBEFLOW_CONFIG_DIR)) {
        if (e.path().extension() != ".ini") continue;
        ++count;
        Config c = Config::load(e.path());
        std::string kind = c.str("experiment", "kind");
        CHECK(std::find(experiment_kinds().begin(), experiment_kinds().end(), kind) != experiment_kinds().end());
    }
    CHECK(count >= 20);
}

TEST_CASE("acceptance runner on a single criterion") {
    TempDir d;
    AcceptanceOptions o;
    o.out_dir = (d.path / "acc").string();
    o.only = {5};
    std::ostringstream out;
    std::vector<CriterionResult> r = run_criteria(o, out);
    REQUIRE(r.size() == 1);
    CHECK(r[0].id == 5);
    CHECK(r[0].pass);
    CHECK(out.str().find("PASS") != std::string::npos);
}
