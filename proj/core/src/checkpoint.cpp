#include "wildscalar/checkpoint.hpp"

#include <unistd.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"
#include "wildscalar/errors.hpp"
#include "wildscalar/norms.hpp"

namespace wildscalar {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kChunk = 1 << 16;

std::uint64_t swap64(std::uint64_t v) {
  v = ((v & 0x00000000FFFFFFFFull) << 32) | ((v & 0xFFFFFFFF00000000ull) >> 32);
  v = ((v & 0x0000FFFF0000FFFFull) << 16) | ((v & 0xFFFF0000FFFF0000ull) >> 16);
  return ((v & 0x00FF00FF00FF00FFull) << 8) | ((v & 0xFF00FF00FF00FF00ull) >> 8);
}

void to_little_endian(std::span<double> buf) {
  if constexpr (std::endian::native == std::endian::little) return;
  for (double& x : buf) {
    std::uint64_t u;
    std::memcpy(&u, &x, 8);
    u = swap64(u);
    std::memcpy(&x, &u, 8);
  }
}

fs::path temp_sibling(const fs::path& p) {
  return p.parent_path() / ("." + p.filename().string() + ".tmp" + std::to_string(::getpid()));
}

void io_fail(const std::string& what, const fs::path& p) {
  throw Error(ErrorKind::IoError, what + " " + p.string());
}

std::string header_line(const GridSpec& g, const std::string& kind, const std::string& name) {
  json h = {{"d", g.d}, {"n", g.n}, {"m_t", g.m_t}, {"window", {g.t0, g.t1}}, {"kind", kind}, {"name", name}};
  std::string line = h.dump();
  while ((line.size() + 1) % 8 != 0) line.push_back(' ');
  line.push_back('\n');
  return line;
}

FieldHeader parse_header(const std::string& line, const fs::path& p) {
  FieldHeader h;
  try {
    const json j = json::parse(line);
    h.grid.d = j.at("d").get<int>();
    h.grid.n = j.at("n").get<int>();
    h.grid.m_t = j.at("m_t").get<int>();
    h.grid.t0 = j.at("window").at(0).get<double>();
    h.grid.t1 = j.at("window").at(1).get<double>();
    h.kind = j.at("kind").get<std::string>();
    h.name = j.at("name").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::IoError, "bad field header in " + p.string() + ": " + e.what());
  }
  return h;
}

json slab_norms(const IterationState& s) {
  return {{"P", c0_norm(s.P)}, {"M", c0_norm(s.M)}, {"Rbar", c0_norm(s.Rbar)}, {"Rtil", c0_norm(s.Rtil)}};
}

}  // namespace

void write_text_atomic(const fs::path& path, const std::string& contents) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  const fs::path tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) io_fail("cannot write", tmp);
    out << contents;
    if (!out.flush()) io_fail("short write to", tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) io_fail("cannot rename onto", path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail("cannot read", path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_field(const fs::path& path, const TimeSlab& slab, const std::string& kind) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  const fs::path tmp = temp_sibling(path);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) io_fail("cannot write", tmp);
    const std::string head = header_line(slab.grid(), kind, slab.name());
    out.write(head.data(), static_cast<std::streamsize>(head.size()));
    const auto raw = slab.raw();
    std::vector<double> buf;
    for (std::size_t i = 0; i < raw.size(); i += kChunk) {
      const std::size_t len = std::min(kChunk, raw.size() - i);
      buf.assign(raw.begin() + i, raw.begin() + i + len);
      to_little_endian(buf);
      out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(len * sizeof(double)));
    }
    if (!out.flush()) io_fail("short write to", tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) io_fail("cannot rename onto", path);
}

FieldHeader read_field_header(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail("cannot read", path);
  std::string line;
  std::getline(in, line);
  return parse_header(line, path);
}

TimeSlab read_field(const fs::path& path, FieldHeader* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_fail("cannot read", path);
  std::string line;
  std::getline(in, line);
  const FieldHeader h = parse_header(line, path);
  if ((line.size() + 1) % 8 != 0) io_fail("unaligned header in", path);
  h.grid.validate();
  TimeSlab slab(h.grid, h.name);
  auto raw = slab.raw();
  const auto expected = static_cast<std::uintmax_t>(line.size() + 1 + raw.size() * sizeof(double));
  if (fs::file_size(path) != expected) io_fail("size mismatch in", path);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size() * sizeof(double)));
  if (!in) io_fail("truncated samples in", path);
  to_little_endian(raw);
  if (header) *header = h;
  return slab;
}

fs::path write_checkpoint(const fs::path& run_dir, const IterationState& state, const std::string& config_text,
                          const ParameterSchedule& schedule) {
  const fs::path root = run_dir / "checkpoints";
  const fs::path final_dir = root / ("q" + std::to_string(state.q));
  const fs::path tmp = root / (".q" + std::to_string(state.q) + ".tmp" + std::to_string(::getpid()));
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp);

  write_field(tmp / "P.wsf", state.P, "scalar");
  write_field(tmp / "M.wsf", state.M, "scalar");
  write_field(tmp / "Rbar_1.wsf", state.Rbar[0], "vector_component");
  write_field(tmp / "Rbar_2.wsf", state.Rbar[1], "vector_component");
  write_field(tmp / "Rtil_1.wsf", state.Rtil[0], "vector_component");
  write_field(tmp / "Rtil_2.wsf", state.Rtil[1], "vector_component");

  const auto& p = schedule.params();
  json sched = {{"lambda0", p.lambda0}, {"b", p.b}, {"beta", p.beta}, {"L", p.L}, {"d", p.d},
                {"gamma", p.gamma},     {"nu", p.nu}, {"K", p.K},     {"C", p.C}, {"Q", p.Q}};
  json lambdas = json::array();
  for (int q = 0; q <= p.Q + 1; ++q) lambdas.push_back(schedule.lambda(q));
  sched["lambda"] = lambdas;
  const json manifest = {{"q", state.q}, {"schedule", sched}, {"norms", slab_norms(state)}, {"config", config_text}};
  write_text_atomic(tmp / "state.json", manifest.dump(2) + "\n");

  const fs::path old = root / (".q" + std::to_string(state.q) + ".old" + std::to_string(::getpid()));
  if (fs::exists(final_dir)) fs::rename(final_dir, old);
  fs::rename(tmp, final_dir, ec);
  if (ec) io_fail("cannot publish checkpoint", final_dir);
  fs::remove_all(old, ec);
  return final_dir;
}

Checkpoint read_checkpoint(const fs::path& q_dir) {
  Checkpoint c;
  c.manifest = read_text(q_dir / "state.json");
  json j;
  try {
    j = json::parse(c.manifest);
    c.state.q = j.at("q").get<int>();
    c.config_text = j.at("config").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::IoError, "bad manifest in " + q_dir.string() + ": " + e.what());
  }
  c.state.P = read_field(q_dir / "P.wsf");
  c.state.M = read_field(q_dir / "M.wsf");
  c.state.Rbar.c[0] = read_field(q_dir / "Rbar_1.wsf");
  c.state.Rbar.c[1] = read_field(q_dir / "Rbar_2.wsf");
  c.state.Rtil.c[0] = read_field(q_dir / "Rtil_1.wsf");
  c.state.Rtil.c[1] = read_field(q_dir / "Rtil_2.wsf");
  const GridSpec& g = c.state.P.grid();
  for (const TimeSlab* s : {&c.state.M, &c.state.Rbar.c[0], &c.state.Rbar.c[1], &c.state.Rtil.c[0], &c.state.Rtil.c[1]})
    if (!(s->grid() == g)) io_fail("inconsistent grids in", q_dir);
  return c;
}

std::optional<fs::path> latest_checkpoint(const fs::path& run_dir) {
  const fs::path root = run_dir / "checkpoints";
  if (!fs::is_directory(root)) return std::nullopt;
  static const std::regex name(R"(q(\d+))");
  std::optional<fs::path> best;
  int best_q = -1;
  for (const auto& entry : fs::directory_iterator(root)) {
    std::smatch m;
    const std::string fn = entry.path().filename().string();
    if (!entry.is_directory() || !std::regex_match(fn, m, name)) continue;
    if (!fs::exists(entry.path() / "state.json")) continue;
    const int q = std::stoi(m[1].str());
    if (q > best_q) best_q = q, best = entry.path();
  }
  return best;
}

}  // namespace wildscalar
