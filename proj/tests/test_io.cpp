#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "ssal/errors.hpp"
#include "ssal/io.hpp"
#include "ssal/log.hpp"
#include "ssal/simulate.hpp"

using namespace ssal;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("ssal_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

struct Quiet {
  Quiet() { set_warnings_enabled(false); }
  ~Quiet() { set_warnings_enabled(true); }
};

void write_raw(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

const char* kSmall =
    "spot_id,row,col,donor_id,slice_id,y,g1,g2\n"
    "a,0,0,0,0,1,0.5,1\n"
    "b,0,1,0,0,0,1.5,2\n"
    "c,1,0,0,0,NA,2.5,3\n"
    "d,1,1,0,0,1,3.5,4\n";

std::string read_error(const std::string& path, const io::ReadOptions& opt = {}) {
  try {
    io::read_dataset({path}, opt);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("csv splitting handles quotes and blank fields") {
  const auto f = io::split_csv_line("a,\"b,c\",,\"d\"\"e\"");
  REQUIRE(f.size() == 4);
  CHECK(f[1] == "b,c");
  CHECK(f[2].empty());
  CHECK(f[3] == "d\"e");
}

TEST_CASE("reading a small dataset") {
  TempDir dir;
  write_raw(dir.file("s.csv"), kSmall);
  const StudyData study = io::read_dataset({dir.file("s.csv")});
  REQUIRE(study.slices.size() == 1);
  const SliceData& s = study.slices[0];
  CHECK(s.size() == 4);
  CHECK(study.covariate_names == std::vector<std::string>{"g1", "g2"});
  CHECK(s.missing_count() == 1);
  CHECK_FALSE(s.observed(2));
  CHECK(s.spot_id(3) == "d");
  CHECK(s.x(1, 0) == 1.5);
  CHECK(s.graph->degree(0) == 2);
}

TEST_CASE("malformed inputs are rejected with the location") {
  TempDir dir;
  SUBCASE("non-finite covariate") {
    write_raw(dir.file("x.csv"), "spot_id,row,col,donor_id,slice_id,y,g1\na,0,0,0,0,1,nan\n");
    const std::string msg = read_error(dir.file("x.csv"));
    CHECK(msg.find("x.csv:2") != std::string::npos);
    CHECK(msg.find("g1") != std::string::npos);
  }
  SUBCASE("invalid outcome") {
    write_raw(dir.file("x.csv"), "spot_id,row,col,donor_id,slice_id,y,g1\na,0,0,0,0,2,1\n");
    CHECK(read_error(dir.file("x.csv")).find("x.csv:2") != std::string::npos);
  }
  SUBCASE("duplicate spot id") {
    write_raw(dir.file("x.csv"), "spot_id,row,col,donor_id,slice_id,y,g1\na,0,0,0,0,1,1\na,0,1,0,0,1,1\n");
    CHECK(read_error(dir.file("x.csv")).find("x.csv:3") != std::string::npos);
  }
  SUBCASE("missing column") {
    write_raw(dir.file("x.csv"), "spot_id,row,col,slice_id,y,g1\na,0,0,0,1,1\n");
    CHECK(read_error(dir.file("x.csv")).find("donor_id") != std::string::npos);
  }
  SUBCASE("negative counts") {
    write_raw(dir.file("x.csv"), "spot_id,row,col,donor_id,slice_id,y,g1\na,0,0,0,0,1,-1\n");
    io::ReadOptions opt;
    opt.counts = true;
    CHECK_FALSE(read_error(dir.file("x.csv"), opt).empty());
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(io::read_dataset({dir.file("none.csv")}), IoError); }
}

TEST_CASE("counts transform and total-count filter") {
  Quiet quiet;
  TempDir dir;
  write_raw(dir.file("c.csv"),
            "spot_id,row,col,donor_id,slice_id,y,g1,g2\na,0,0,0,0,1,3,0\nb,0,1,0,0,0,5,1\n");
  io::ReadOptions opt;
  opt.counts = true;
  opt.min_total_count = 2.0;
  const StudyData study = io::read_dataset({dir.file("c.csv")}, opt);
  REQUIRE(study.covariate_names == std::vector<std::string>{"g1"});
  CHECK(study.slices[0].x(0, 0) == doctest::Approx(std::log(4.0)));
  opt.min_total_count = 100.0;
  CHECK_THROWS_AS(io::read_dataset({dir.file("c.csv")}, opt), InputError);
}

TEST_CASE("simulated datasets round-trip through CSV, including gzip") {
  const SimulatedStudy sim = simulate_any(preset("sim3-mcar10"));
  TempDir dir;
  for (const std::string name : {"d.csv", "d.csv.gz"}) {
    io::write_text(dir.file(name), io::dataset_csv(sim.study));
    const StudyData back = io::read_dataset({dir.file(name)});
    REQUIRE(back.slices.size() == 1);
    const SliceData& a = sim.study.slices[0];
    const SliceData& b = back.slices[0];
    CHECK(b.size() == 900);
    CHECK(back.d() == 20);
    CHECK(b.missing_count() == 10);
    CHECK(b.r == a.r);
    CHECK(b.x.isApprox(a.x, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a.observed(i)) CHECK(a.y[i] == b.y[i]);
    }
    for (std::size_t i : b.missing()) CHECK(b.graph->degree(i) == 4);
  }
  std::ifstream raw(dir.file("d.csv.gz"), std::ios::binary);
  unsigned char magic[2] = {0, 0};
  raw.read(reinterpret_cast<char*>(magic), 2);
  CHECK(magic[0] == 0x1f);
  CHECK(magic[1] == 0x8b);
}

TEST_CASE("writes are atomic and create parent directories") {
  TempDir dir;
  const std::string target = dir.file("sub/dir/out.txt");
  io::write_text(target, "hello\n");
  CHECK(io::read_text(target) == "hello\n");
  CHECK_FALSE(fs::exists(target + ".partial"));
  io::write_text(target, "again\n");
  CHECK(io::read_text(target) == "again\n");
}

TEST_CASE("multi-slice files read back as donors and positions") {
  TempDir dir;
  const SimulatedStudy sim = simulate_any(preset("sim2"));
  io::write_text(dir.file("m.csv"), io::dataset_csv(sim.study));
  io::ReadOptions opt;
  opt.multislice = true;
  const StudyData back = io::read_dataset({dir.file("m.csv")}, opt);
  CHECK(back.donors == 4);
  CHECK(back.slices_per_donor == 6);
  CHECK(back.slices.size() == 24);
  CHECK_FALSE(back.padded);
}

TEST_CASE("unequal slice counts need explicit padding") {
  TempDir dir;
  write_raw(dir.file("u.csv"),
            "spot_id,row,col,donor_id,slice_id,y,g1\n"
            "a,0,0,1,1,1,0.1\nb,0,1,1,1,0,0.2\n"
            "c,0,0,1,2,1,0.3\nd,0,1,1,2,0,0.4\n"
            "e,0,0,2,1,1,0.5\nf,0,1,2,1,0,0.6\n");
  io::ReadOptions opt;
  opt.multislice = true;
  CHECK_THROWS_AS(io::read_dataset({dir.file("u.csv")}, opt), InputError);
  opt.allow_unequal = true;
  const StudyData padded = io::read_dataset({dir.file("u.csv")}, opt);
  CHECK(padded.padded);
  CHECK(padded.slices_per_donor == 2);
  CHECK(padded.slices.size() == 3);
}

TEST_CASE("parameters and models serialize losslessly") {
  const SimulatedStudy sim = simulate_any(preset("sim3-nonign1"));
  const ModelParams back = io::params_from_json(io::params_json(sim.truth));
  CHECK(back.eta == sim.truth.eta);
  CHECK(back.beta.isApprox(sim.truth.beta, 0.0));
  CHECK(back.gamma == sim.truth.gamma);
  const auto truth = io::truth_json(sim);
  CHECK(truth.contains("config"));
  CHECK(truth.contains("truth"));
  CHECK_THROWS_AS(io::model_from_json(nlohmann::json::object()), InputError);
}
