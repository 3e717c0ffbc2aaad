#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "denjoy/distortion.hpp"
#include "denjoy/io.hpp"
#include "denjoy/rng.hpp"

using namespace denjoy;

TEST(Format, SeventeenDigitsRoundTrip) {
    Rng rng = Rng::substream(3, 0);
    for (int k = 0; k < 10000; ++k) {
        std::uint64_t bits = rng();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        if (!std::isfinite(v)) continue;
        const double back = parse_double(fmt(v), "v");
        ASSERT_EQ(std::memcmp(&v, &back, sizeof v), 0) << fmt(v);
    }
    EXPECT_EQ(fmt(0.1), "0.10000000000000001");
    EXPECT_THROW(parse_double("1.5x", "key"), config_error);
    EXPECT_THROW(parse_long("", "key"), config_error);
}

TEST(Checksum, Fnv1aVectors) {
    EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
    EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
    EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ull);
    EXPECT_EQ(hex64(0xabcull), "0000000000000abc");
}

TEST(Csv, WritesAndParses) {
    Csv c({"n", "value"});
    c.comment("experiment=demo").row({1, 0.5}).row({2, 1.0 / 3});
    const std::string s = c.str();
    EXPECT_EQ(s, "# experiment=demo\nn,value\n1,0.5\n2,0.33333333333333331\n");
    const auto p = parse_csv(s);
    ASSERT_EQ(p.rows.size(), 2u);
    EXPECT_EQ(p.comments.front(), "experiment=demo");
    EXPECT_EQ(parse_double(p.rows[1][p.column("value")], "value"), 1.0 / 3);
    EXPECT_THROW(p.column("missing"), config_error);
    EXPECT_THROW(c.row({1.0, std::nan("")}), internal_error);
    EXPECT_THROW(c.row({1.0, INFINITY}), internal_error);
    EXPECT_THROW(c.row({1.0}), internal_error);
    EXPECT_THROW(parse_csv("a,b\n1\n"), config_error);
}

TEST(Svg, WellFormedEnough) {
    const auto s = svg_plot("trace", {{"a", {0, 1, 2}, {1, 0.5, 0.25}}, {"b", {0, 2}, {1, 1}}}, true);
    EXPECT_EQ(s.rfind("<svg", 0), 0u);
    EXPECT_NE(s.find("</svg>"), std::string::npos);
    EXPECT_EQ(s.find("nan"), std::string::npos);
}

namespace {

void expect_same_system(const GapSystem& a, const GapSystem& b) {
    ASSERT_EQ(a.gaps().size(), b.gaps().size());
    for (std::size_t k = 0; k < a.gaps().size(); ++k) {
        const auto &g = a.gaps()[k], &h = b.gaps()[k];
        ASSERT_EQ(g.idx, h.idx);
        ASSERT_EQ(std::memcmp(&g.left, &h.left, sizeof(double)), 0);
        ASSERT_EQ(std::memcmp(&g.length, &h.length, sizeof(double)), 0);
        ASSERT_EQ(std::memcmp(&g.s, &h.s, sizeof(double)), 0);
    }
    EXPECT_EQ(a.catalog().rho, b.catalog().rho);
    EXPECT_EQ(a.total_gap_mass(), b.total_gap_mass());
    for (int j = 0; j < a.spec().d; ++j)
        for (const auto& g : a.gaps()) {
            const double x = g.left + 0.37 * g.length;
            try {
                const double u = a.generator(j)(x);
                EXPECT_EQ(u, b.generator(j)(x));
            } catch (const truncation_error&) {
                EXPECT_THROW(b.generator(j)(x), truncation_error);
            }
        }
}

}  // namespace

TEST(GapCatalog, CircleRoundTripIsBitExact) {
    GapSpec spec;
    spec.R = 30;
    spec.min_mass_fraction = 0.2;
    const auto sys = build_circle_denjoy(spec);
    const std::string text = export_gap_system(sys);
    const auto back = import_gap_system(text);
    expect_same_system(sys, back);
    EXPECT_EQ(export_gap_system(back), text);
    // off-gap points go through the rotation coordinate
    for (double x : linspace(0.0, 0.99, 50)) EXPECT_EQ(sys.generator(0)(x), back.generator(0)(x));
}

TEST(GapCatalog, IntervalRoundTripIsBitExact) {
    GapSpec spec;
    spec.R = 20;
    const auto sys = build_interval_pixton(spec);
    const std::string text = export_gap_system(sys);
    const auto back = import_gap_system(text);
    expect_same_system(sys, back);
    EXPECT_EQ(export_gap_system(back), text);
    EXPECT_FALSE(back.is_circle());
}

TEST(GapCatalog, RejectsDamage) {
    GapSpec spec;
    spec.R = 10;
    spec.min_mass_fraction = 0.1;
    const std::string text = export_gap_system(build_circle_denjoy(spec));
    auto drop_line = [&](const std::string& prefix) {
        std::string out;
        for (const auto& l : split(text, '\n'))
            if (!l.empty() && l.rfind(prefix, 0) != 0) out += l + "\n";
        return out;
    };
    EXPECT_THROW(import_gap_system(drop_line("# rho=")), config_error);
    EXPECT_THROW(import_gap_system(drop_line("0,0,")), config_error);  // base gap
    std::string swapped = text;
    swapped.replace(swapped.find("kind=circle"), 11, "kind=spiral");
    EXPECT_THROW(import_gap_system(swapped), config_error);
}
