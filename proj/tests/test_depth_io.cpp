#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "pcgrasp/depth_io.hpp"
#include "pcgrasp/error.hpp"
#include "test_util.hpp"

using namespace pcgrasp;
namespace fs = std::filesystem;

TEST_CASE("pgm16 round trip preserves samples") {
  TempDir dir;
  DepthFrame f{2, 2, {400, 0, 500, 600}};
  save_pgm16(dir / "a.pgm", f);
  const DepthFrame g = load_depth_frame(dir / "a.pgm", DepthFormat::pgm16);
  CHECK(g.width == 2);
  CHECK(g.height == 2);
  CHECK(g.data == f.data);
}

TEST_CASE("pgm16 samples are big-endian on disk") {
  TempDir dir;
  save_pgm16(dir / "b.pgm", DepthFrame{2, 1, {0x0102, 0xA0B0}});
  std::ifstream in(dir / "b.pgm", std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), {});
  REQUIRE(bytes.size() >= 4);
  const std::string tail = bytes.substr(bytes.size() - 4);
  CHECK(static_cast<unsigned char>(tail[0]) == 0x01);
  CHECK(static_cast<unsigned char>(tail[1]) == 0x02);
  CHECK(static_cast<unsigned char>(tail[2]) == 0xA0);
  CHECK(static_cast<unsigned char>(tail[3]) == 0xB0);
}

TEST_CASE("pgm header with comments parses") {
  TempDir dir;
  {
    std::ofstream out(dir / "c.pgm", std::ios::binary);
    out << "P5\n# sensor dump\n2 1\n# max\n65535\n";
    const unsigned char px[4] = {0x01, 0x90, 0x00, 0x00};
    out.write(reinterpret_cast<const char*>(px), 4);
  }
  const DepthFrame f = load_depth_frame(dir / "c.pgm", DepthFormat::pgm16);
  CHECK(f.data == std::vector<std::uint16_t>{400, 0});
}

TEST_CASE("zero-length file is a malformed header") {
  TempDir dir;
  std::ofstream(dir / "empty.pgm").close();
  try {
    load_depth_frame(dir / "empty.pgm", DepthFormat::pgm16);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("malformed header") != std::string::npos);
    CHECK(msg.find("empty.pgm") != std::string::npos);
  }
}

TEST_CASE("truncated pgm payload is rejected") {
  TempDir dir;
  {
    std::ofstream out(dir / "t.pgm", std::ios::binary);
    out << "P5\n4 4\n65535\n";
    out.write("\x01\x02", 2);
  }
  CHECK_THROWS_AS(load_depth_frame(dir / "t.pgm", DepthFormat::pgm16), IoError);
}

TEST_CASE("missing file is an io error") {
  CHECK_THROWS_AS(load_depth_frame("/nonexistent/frame.pgm", DepthFormat::pgm16), IoError);
}

TEST_CASE("csv parses against an independent text parse") {
  TempDir dir;
  const std::string text = "400,500\n600,700\n";
  std::ofstream(dir / "d.csv") << text;
  const DepthFrame f = load_depth_frame(dir / "d.csv", DepthFormat::csv);

  std::vector<std::uint16_t> expect;
  int rows = 0;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    ++rows;
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');)
      expect.push_back(static_cast<std::uint16_t>(std::stoi(cell)));
  }
  CHECK(f.height == rows);
  CHECK(f.width == 2);
  CHECK(f.data == expect);
}

TEST_CASE("csv with ragged rows is a dimension mismatch") {
  TempDir dir;
  std::ofstream(dir / "r.csv") << "1,2,3\n4,5\n";
  CHECK_THROWS_AS(load_depth_frame(dir / "r.csv", DepthFormat::csv), IoError);
}

TEST_CASE("raw16le round trip uses the sidecar") {
  TempDir dir;
  DepthFrame f{3, 2, {1, 2, 3, 65535, 0, 42}};
  save_raw16le(dir / "e.raw", f);
  CHECK(fs::exists(dir / "e.raw.json"));
  CHECK(fs::file_size(dir / "e.raw") == 12);
  const DepthFrame g = load_depth_frame(dir / "e.raw", DepthFormat::raw16le);
  CHECK(g.width == 3);
  CHECK(g.data == f.data);
}

TEST_CASE("raw16le size that disagrees with the sidecar is rejected") {
  TempDir dir;
  save_raw16le(dir / "e.raw", DepthFrame{3, 2, {1, 2, 3, 4, 5, 6}});
  std::ofstream(dir / "e.raw", std::ios::binary | std::ios::app).write("\0\0", 2);
  CHECK_THROWS_AS(load_depth_frame(dir / "e.raw", DepthFormat::raw16le), IoError);
}

TEST_CASE("format names and extensions") {
  CHECK(parse_depth_format("pgm") == DepthFormat::pgm16);
  CHECK(parse_depth_format("raw16le") == DepthFormat::raw16le);
  CHECK(parse_depth_format("csv") == DepthFormat::csv);
  CHECK_THROWS_AS(parse_depth_format("png"), ConfigError);
  CHECK(depth_format_from_extension("x/frame_0001.pgm") == DepthFormat::pgm16);
  CHECK_FALSE(depth_format_from_extension("x/notes.txt").has_value());
}

TEST_CASE("backprojection examples") {
  CameraIntrinsics intr;
  intr.fx = intr.fy = 600.0;
  DepthFrame f{640, 480, std::vector<std::uint16_t>(640 * 480, 0)};
  f.data[240 * 640 + 320] = 400;
  f.data[240 * 640 + 620] = 600;
  const PointCloud c = backproject(f, intr, 1);
  REQUIRE(c.size() == 2);
  CHECK(c.points[0] == Point3{0, 0, 400});
  CHECK(c.points[1] == Point3{300, 0, 600});

  const auto [u0, v0] = project({0, 0, 400}, intr);
  CHECK(u0 == 320.0);
  CHECK(v0 == 240.0);
  const auto [u1, v1] = project({300, 0, 600}, intr);
  CHECK(u1 == doctest::Approx(620.0).epsilon(1e-12));
  CHECK(v1 == 240.0);
  CHECK_THROWS_AS(project({1, 1, -5}, intr), GeometryError);
}

TEST_CASE("backprojection skips zeros, honors stride and depth scale") {
  CameraIntrinsics intr;
  DepthFrame zeros{640, 480, std::vector<std::uint16_t>(640 * 480, 0)};
  CHECK(backproject(zeros, intr, 2).empty());

  DepthFrame ones{640, 480, std::vector<std::uint16_t>(640 * 480, 1000)};
  CHECK(backproject(ones, intr, 2).size() == 320u * 240u);
  CHECK(backproject(ones, intr, 3).size() == 214u * 160u);

  intr.depth_scale = 0.5;
  CHECK(backproject(ones, intr, 1).points.front().z == 500.0);
}

TEST_CASE("backprojection rejects a frame that does not match the intrinsics") {
  DepthFrame f{320, 240, std::vector<std::uint16_t>(320 * 240, 1)};
  CHECK_THROWS_AS(backproject(f, CameraIntrinsics{}, 2), IoError);
  DepthFrame full{640, 480, std::vector<std::uint16_t>(640 * 480, 1)};
  CHECK_THROWS_AS(backproject(full, CameraIntrinsics{}, 0), ConfigError);
}

TEST_CASE("intrinsics json round trip and validation") {
  TempDir dir;
  CameraIntrinsics intr;
  intr.fx = 612.5;
  intr.depth_scale = 0.25;
  save_intrinsics(dir / "cam.json", intr);
  const CameraIntrinsics back = load_intrinsics(dir / "cam.json");
  CHECK(back.fx == 612.5);
  CHECK(back.depth_scale == 0.25);
  CHECK(back.width == 640);

  std::ofstream(dir / "bad.json") << R"({"fx": -1, "fy": 600, "cx": 320, "cy": 240, "width": 640, "height": 480})";
  CHECK_THROWS_AS(load_intrinsics(dir / "bad.json"), ConfigError);
}
