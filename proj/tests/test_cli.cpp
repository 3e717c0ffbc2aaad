#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "denjoy/experiments.hpp"

using namespace denjoy;
namespace fs = std::filesystem;

namespace {

struct Ran {
    int status = -1;
    std::string output;
};

Ran invoke(const std::string& args) {
    const std::string cmd = std::string(DENJOY_LAB_EXE) + " " + args + " 2>&1";
    Ran r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("denjoy_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    return dir;
}

double cell(const ParsedCsv& csv, std::size_t row, const std::string& col) {
    return parse_double(csv.rows.at(row).at(csv.column(col)), col);
}

}  // namespace

TEST(Cli, UrnExactLayerIsUniform) {
    const auto out = scratch("urn");
    const auto r = invoke("run urn-exact --set d=2 --set k=10 --out " + out.string());
    ASSERT_EQ(r.status, 0) << r.output;
    const auto csv = parse_csv(read_file(out / "arrival.csv"));
    ASSERT_EQ(csv.rows.size(), 11u);
    for (std::size_t i = 0; i < 11; ++i) {
        EXPECT_NEAR(cell(csv, i, "probability"), 1.0 / 11, 1e-15);
        EXPECT_EQ(cell(csv, i, "n1") + cell(csv, i, "n2"), 10.0);
    }
}

TEST(Cli, LyapunovOnRotation) {
    const auto out = scratch("lyap");
    const auto r = invoke("run lyapunov --set scenario=rotation --set words=200 --set length=200 --out " + out.string());
    ASSERT_EQ(r.status, 0) << r.output;
    const auto csv = parse_csv(read_file(out / "lyapunov.csv"));
    ASSERT_EQ(csv.rows.size(), 1u);
    EXPECT_EQ(cell(csv, 0, "quadrature"), 0.0);
    EXPECT_LE(std::abs(cell(csv, 0, "birkhoff_mean")), 2 * cell(csv, 0, "birkhoff_se"));
}

TEST(Cli, AffineSpringHuntMatchesTheAddressMap) {
    const auto out = scratch("spring");
    const auto r = invoke("run spring-hunt --set kind=affine --set trials=100 --out " + out.string());
    ASSERT_EQ(r.status, 0) << r.output;
    const auto csv = parse_csv(read_file(out / "certificates.csv"));
    ASSERT_EQ(csv.rows.size(), 100u);
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        EXPECT_EQ(cell(csv, i, "certified"), 1.0);
        EXPECT_LT(cell(csv, i, "oracle_error"), 1e-10);
        EXPECT_NEAR(cell(csv, i, "derivative"), std::pow(3.0, -cell(csv, i, "word_length")), 1e-12);
    }
}

TEST(Cli, ExitCodes) {
    const auto out = scratch("codes").string();
    EXPECT_EQ(invoke("run urn-exact --set bogus=1 --out " + out).status, 3);
    EXPECT_EQ(invoke("run urn-exact --set k=ten --out " + out).status, 3);
    EXPECT_EQ(invoke("run urn-exact --set k --out " + out).status, 3);
    EXPECT_EQ(invoke("run no-such-experiment --out " + out).status, 3);
    EXPECT_EQ(invoke("run spring-hunt --set kind=hyperbolic --out " + out).status, 3);
    EXPECT_EQ(invoke("run urn-exact --config /nonexistent/file --out " + out).status, 3);
    EXPECT_EQ(invoke("frobnicate").status, 3);
    // a rotation never collapses: the asserted fraction fails
    const auto bad = invoke("run dirac-collapse --set scenario=rotation --set words=20 --set length=10 --out " + out);
    EXPECT_EQ(bad.status, 2) << bad.output;
    EXPECT_NE(bad.output.find("FAIL collapsed fraction"), std::string::npos);
    EXPECT_EQ(invoke("run urn-exact --out " + out).status, 0);
}

TEST(Cli, UnknownKeyNamesTheKey) {
    const auto r = invoke("run kopell-check --set n_maxx=3 --out " + scratch("key").string());
    EXPECT_EQ(r.status, 3);
    EXPECT_NE(r.output.find("n_maxx"), std::string::npos);
}

TEST(Cli, ReproducibleAndManifestChecksums) {
    const auto a = scratch("rep_a"), b = scratch("rep_b");
    const std::string args = "run contraction-trace --set words=50 --set length=25 --seed 7 --out ";
    ASSERT_EQ(invoke(args + a.string()).status, 0);
    ASSERT_EQ(invoke(args + b.string()).status, 0);
    int files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        if (e.path().extension() != ".csv") continue;
        EXPECT_EQ(read_file(e.path()), read_file(b / e.path().filename())) << e.path();
        ++files;
    }
    EXPECT_EQ(files, 2);
    const std::string man = read_file(a / "manifest.txt");
    EXPECT_NE(man.find("seed=7\n"), std::string::npos);
    EXPECT_NE(man.find("words=50\n"), std::string::npos);
    EXPECT_NE(man.find("scenario=psl\n"), std::string::npos);
    const std::string bytes = read_file(a / "contraction.csv");
    EXPECT_NE(man.find("# artifact contraction.csv fnv1a=" + hex64(fnv1a(bytes))), std::string::npos);
    // a different seed changes the samples
    const auto c = scratch("rep_c");
    ASSERT_EQ(invoke("run contraction-trace --set words=50 --set length=25 --seed 8 --out " + c.string()).status, 0);
    EXPECT_NE(read_file(c / "contraction.csv"), bytes);
}

TEST(Cli, ManifestIsAConfig) {
    const auto a = scratch("man_a"), b = scratch("man_b");
    ASSERT_EQ(invoke("run ell-tau --set system=affine --set words=20 --set length=50 --seed 3 --out " + a.string()).status, 0);
    const auto r = invoke("run --config " + (a / "manifest.txt").string() + " --out " + b.string());
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_EQ(read_file(a / "ell_tau.csv"), read_file(b / "ell_tau.csv"));
    // a config file with comments and an override on top
    const auto cfg = scratch("cfg") / "urn.cfg";
    write_file(cfg, "# urn layer\nd=3\n\nk=4\n");
    const auto c = scratch("cfg_out");
    ASSERT_EQ(invoke("run urn-exact --config " + cfg.string() + " --set k=5 --out " + c.string()).status, 0);
    EXPECT_EQ(parse_csv(read_file(c / "arrival.csv")).rows.size(), 21u);  // C(7, 2)
    write_file(cfg, "d=3\nk\n");
    EXPECT_EQ(invoke("run urn-exact --config " + cfg.string() + " --out " + c.string()).status, 3);
}

TEST(Cli, EveryNumberIsFinite) {
    const auto out = scratch("finite");
    for (const std::string e : {"spring-hunt --set kind=mobius --set trials=50", "conjugate-cdf", "interval-escape --set iters=200 --set threshold=1",
                                "denjoy-build --set R=20 --set min_mass_fraction=0"}) {
        const auto dir = out / e.substr(0, e.find(' '));
        ASSERT_EQ(invoke("run " + e + " --out " + dir.string()).status, 0) << e;
        for (const auto& f : fs::directory_iterator(dir)) {
            if (f.path().extension() != ".csv") continue;
            const auto csv = parse_csv(read_file(f.path()));
            for (const auto& row : csv.rows)
                for (const auto& c : row) {
                    if (c.empty() || csv.header.front() == "key") continue;
                    ASSERT_TRUE(std::isfinite(parse_double(c, f.path().string()))) << f.path() << ": " << c;
                }
        }
    }
}

TEST(Cli, PlotsAreOptional) {
    const auto a = scratch("noplot"), b = scratch("plot");
    ASSERT_EQ(invoke("run cano-check --out " + a.string()).status, 0);
    ASSERT_EQ(invoke("run interval-escape --set iters=100 --set threshold=1 --plots --out " + b.string()).status, 0);
    EXPECT_FALSE(fs::exists(a / "escape.svg"));
    EXPECT_TRUE(fs::exists(b / "escape.svg"));
    EXPECT_EQ(read_file(b / "escape.svg").rfind("<svg", 0), 0u);
}

TEST(Cli, ImportedCatalogMatchesTheBuild) {
    const auto out = scratch("catalog");
    ASSERT_EQ(invoke("run pixton-build --set R=15 --out " + out.string()).status, 0);
    GapSpec s;
    s.R = 15;
    s.min_mass_fraction = 0.2;
    EXPECT_EQ(read_file(out / "gaps.csv"), export_gap_system(build_interval_pixton(s)));
}

TEST(Cli, SuiteByTag) {
    const auto out = scratch("suite");
    const auto r = invoke("suite --tag walks --out " + out.string());
    EXPECT_EQ(r.status, 0) << r.output;
    EXPECT_NE(r.output.find("PASS  1 urn-equidistribution"), std::string::npos);
    const auto csv = parse_csv(read_file(out / "suite.csv"));
    ASSERT_EQ(csv.rows.size(), 1u);
    EXPECT_EQ(csv.rows[0][csv.column("pass")], "1");
    EXPECT_EQ(invoke("suite --tag nonsense").status, 3);
}

TEST(Cli, SuiteNamesAnInjectedFault) {
    const auto r = invoke("suite --tag sacksteder --inject corrupt-spring");
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.output.find("FAIL  5 hyperbolic-hunting"), std::string::npos) << r.output;
    EXPECT_EQ(invoke("suite --inject nothing-like-this").status, 3);
}

TEST(Cli, ListShowsKeys) {
    const auto r = invoke("list urn-exact");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.output.find("k=10"), std::string::npos);
    const auto all = invoke("list").output;
    EXPECT_EQ(std::count(all.begin(), all.end(), '\n'), long(experiments().size()));
}
