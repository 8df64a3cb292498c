#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lensdepth/error.hpp"
#include "lensdepth/io.hpp"
#include "lensdepth/svg.hpp"

using namespace lensdepth;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() : path_(fs::temp_directory_path() / ("lensdepth_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                                    ::testing::UnitTest::GetInstance()->current_test_info()->name())) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    fs::path file(const std::string& name, const std::string& content) const {
        const fs::path p = path_ / name;
        std::ofstream(p, std::ios::binary) << content;
        return p;
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Shape, Parsing) {
    const io::Shape s = io::parse_shape("3x2");
    EXPECT_EQ(s.rows, 3u);
    EXPECT_EQ(s.cols, 2u);
    EXPECT_THROW(io::parse_shape("3"), DomainError);
    EXPECT_THROW(io::parse_shape("2x3"), DomainError);
    EXPECT_THROW(io::parse_shape("ax2"), DomainError);
    EXPECT_THROW(io::parse_shape("0x0"), DomainError);
}

TEST(ReadPoints, EuclideanWithCommentsAndBlankLines) {
    TempDir dir;
    const auto p = dir.file("s.csv", "# sample\nx,y\n0,1\n\n2.5, -3\n1e-3,+4\n");
    const auto loaded = io::read_points(p, MetricKind::euclidean);
    ASSERT_EQ(loaded.points.size(), 3u);
    EXPECT_EQ(loaded.space, MetricSpace::euclidean(2));
    EXPECT_EQ(std::get<RealVector>(loaded.points[1]).coords, (std::vector<double>{2.5, -3}));
    EXPECT_EQ(loaded.lines, (std::vector<std::size_t>{3, 5, 6}));
}

TEST(ReadPoints, ErrorsCarryFileAndLine) {
    TempDir dir;
    const auto bad_number = dir.file("a.csv", "x\n1\nfoo\n");
    const std::string m1 = message_of([&] { io::read_points(bad_number, MetricKind::euclidean); });
    EXPECT_NE(m1.find(bad_number.string() + ":3:"), std::string::npos) << m1;
    const auto ragged = dir.file("b.csv", "x,y\n1,2\n3\n");
    const std::string m2 = message_of([&] { io::read_points(ragged, MetricKind::euclidean); });
    EXPECT_NE(m2.find(":3:"), std::string::npos) << m2;
    const auto no_header = dir.file("c.csv", "1,2\n");
    EXPECT_THROW(io::read_points(no_header, MetricKind::euclidean), ParseError);
    const auto off_sphere = dir.file("d.csv", "x,y,z\n0,0,1\n0,1,1\n");
    const std::string m3 = message_of([&] { io::read_points(off_sphere, MetricKind::sphere); });
    EXPECT_NE(m3.find(":3:"), std::string::npos) << m3;
    EXPECT_THROW(io::read_points(dir.path() / "missing.csv", MetricKind::euclidean), Error);
}

TEST(ReadPoints, FramesFromHeaderOrShape) {
    TempDir dir;
    const auto p = dir.file("f.csv", "m11,m12,m21,m22,m31,m32\n1,0,0,1,0,0\n0,0,1,0,0,1\n");
    const auto loaded = io::read_points(p, MetricKind::stiefel_chordal);
    EXPECT_EQ(loaded.space, MetricSpace::stiefel(3, 2));
    EXPECT_EQ(loaded.points.size(), 2u);
    const auto q = dir.file("g.csv", "a,b,c,d,e,f\n1,0,0,1,0,0\n");
    EXPECT_THROW(io::read_points(q, MetricKind::stiefel_procrustes), ParseError);
    EXPECT_EQ(io::read_points(q, MetricKind::stiefel_procrustes, io::Shape{3, 2}).space,
              MetricSpace::stiefel(3, 2, StiefelMode::procrustes));
    const auto not_orthonormal = dir.file("h.csv", "m11,m12,m21,m22,m31,m32\n1,1,0,1,0,0\n");
    EXPECT_THROW(io::read_points(not_orthonormal, MetricKind::stiefel_chordal), ParseError);
}

TEST(ReadPoints, NewickFile) {
    TempDir dir;
    const auto p = dir.file("t.nwk", "# trees\n((A:1,B:1):0.5,C:1,(D:1,E:1):0.5);\n\n((A:1,C:1):0.5,B:1,(D:1,E:1):0.5);\n");
    const auto loaded = io::read_points(p, MetricKind::bhv);
    EXPECT_EQ(loaded.space, MetricSpace::bhv(5));
    EXPECT_EQ(loaded.lines, (std::vector<std::size_t>{2, 4}));
}

TEST(FormatNumber, RoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, 0.0}) {
        const std::string s = io::format_number(v);
        EXPECT_EQ(std::stod(s), v) << s;
    }
    EXPECT_EQ(io::format_number(0.5), "0.5");
    EXPECT_EQ(io::format_number(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Fnv1a, KnownValues) {
    EXPECT_EQ(io::fnv1a(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(io::fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Render, CsvHeaderAndRows) {
    io::Table t{{"index", "depth", "label"}, {{std::int64_t{0}, 0.5, std::string("a,b")}, {std::int64_t{1}, 1.0 / 3, std::string("c")}}};
    const std::string csv = io::render_csv(t, {"depth", 7, 0xabcULL, ""});
    EXPECT_EQ(csv,
              "# lensdepth 0.1.0\n# command: depth\n# seed: 7\n# config-hash: 0000000000000abc\n"
              "index,depth,label\n0,0.5,\"a,b\"\n1,0.33333333333333331,c\n");
    const std::string stamped = io::render_csv(t, {"depth", 7, 1, "2026-01-01T00:00:00Z"});
    EXPECT_NE(stamped.find("# generated: 2026-01-01T00:00:00Z\n"), std::string::npos);
}

TEST(Render, JsonMatchesCsvValues) {
    io::Table t{{"x", "y"}, {{0.1, std::int64_t{3}}, {std::numeric_limits<double>::infinity(), std::int64_t{-1}}}};
    const auto j = nlohmann::json::parse(io::render(t, {"psi", 1, 2, ""}, "json"));
    EXPECT_EQ(j["provenance"]["seed"], 1);
    EXPECT_EQ(j["provenance"]["config_hash"], "0000000000000002");
    EXPECT_FALSE(j["provenance"].contains("generated"));
    EXPECT_EQ(j["columns"], nlohmann::json({"x", "y"}));
    EXPECT_EQ(j["rows"][0][0].get<double>(), 0.1);
    EXPECT_EQ(j["rows"][1][0], "inf");
    EXPECT_THROW(io::render(t, {}, "xml"), DomainError);
}

TEST(AtomicWrite, ReplacesWithoutLeftovers) {
    TempDir dir;
    const fs::path p = dir.path() / "out.csv";
    io::atomic_write(p, "first\n");
    io::atomic_write(p, "second\n");
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), "second\n");
    EXPECT_EQ(std::distance(fs::directory_iterator(dir.path()), fs::directory_iterator()), 1);
    EXPECT_THROW(io::atomic_write(dir.path() / "no" / "such" / "dir.csv", "x"), Error);
}

TEST(Svg, ProducesWellFormedDocuments) {
    const std::string s = svg::scatter({{0.1, 0.2, 0}, {0.5, 0.4, 1}}, {"dd <plot>", "group 0", "group 1"}, true);
    EXPECT_EQ(s.rfind("<svg", 0), 0u);
    EXPECT_NE(s.find("</svg>"), std::string::npos);
    EXPECT_NE(s.find("&lt;plot&gt;"), std::string::npos);
    const std::string l = svg::lines({{"a", {0, 1}, {1, 0}}, {"b", {0, 1}, {0.5, 0.5}}}, {"psi", "lambda", "psi"});
    EXPECT_NE(l.find("<polyline"), std::string::npos);
}
