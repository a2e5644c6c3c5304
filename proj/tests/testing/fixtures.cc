#include "testing/fixtures.h"

#include <fmt/format.h>
#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "trajbench/camera.h"

namespace trajbench::testing {

namespace fs = std::filesystem;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

CliResult run_cli(const std::string& exe, const std::string& args, const fs::path& cwd) {
  std::string cmd = "'" + exe + "' " + args + " 2>&1";
  if (!cwd.empty()) cmd = "cd '" + cwd.string() + "' && " + cmd;
  CliResult r;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  const int st = ::pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

TumArchive make_tum_archive(const fs::path& dir, const std::string& sequence) {
  const fs::path src = dir / "src" / ("rgbd_dataset_" + sequence);
  fs::create_directories(src / "rgb");
  std::string rgb_txt = fmt::format(
      "# color images\n# file: 'rgbd_dataset_{}.bag'\n# timestamp filename\n", sequence);
  std::string gt_txt = "# ground truth trajectory\n# timestamp tx ty tz qx qy qz qw\n";
  for (int k = 0; k < 4; ++k) {
    const double t = 1305031102.175304 + 0.033 * k;
    Image img(640, 480, 3);
    for (int y = 0; y < 480; ++y) {
      for (int x = 0; x < 640; ++x) {
        img.at(x, y, 0) = static_cast<std::uint8_t>((x / 40 + y / 40 + k) % 2 ? 220 : 30);
        img.at(x, y, 1) = static_cast<std::uint8_t>(x % 256);
        img.at(x, y, 2) = static_cast<std::uint8_t>(y % 256);
      }
    }
    const std::string name = fmt::format("rgb/{:.6f}.png", t);
    write_image((src / name).string(), img);
    rgb_txt += fmt::format("{:.6f} {}\n", t, name);
    gt_txt += fmt::format("{:.4f} {:.4f} 0.6258 1.4910 0.6132 0.5962 -0.3311 -0.3986\n",
                          t + 0.001, 1.3 + 0.01 * k);
  }
  spit(src / "rgb.txt", rgb_txt);
  spit(src / "groundtruth.txt", gt_txt);

  TumArchive out;
  out.sequence = sequence;
  const int cam = sequence.size() > 8 ? sequence[8] - '0' : 1;  // freiburgN_
  out.archive = dir / "srv" / fmt::format("freiburg{}", cam) /
                ("rgbd_dataset_" + sequence + ".tgz");
  fs::create_directories(out.archive.parent_path());
  const std::string cmd = fmt::format("tar -czf '{}' -C '{}' 'rgbd_dataset_{}'",
                                      out.archive.string(), (dir / "src").string(), sequence);
  if (std::system(cmd.c_str()) != 0) throw std::runtime_error("tar failed: " + cmd);
  out.base_url = "file://" + (dir / "srv").string();
  return out;
}

}  // namespace trajbench::testing
