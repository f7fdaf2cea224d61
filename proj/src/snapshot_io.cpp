#include "mkg/snapshot_io.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace mkg {

namespace {

using nlohmann::json;

void write_doubles(std::ofstream& out, const double* data, std::int64_t count) {
  out.write(reinterpret_cast<const char*>(data), count * std::int64_t(sizeof(double)));
}

void read_doubles(std::ifstream& in, double* data, std::int64_t count) {
  in.read(reinterpret_cast<char*>(data), count * std::int64_t(sizeof(double)));
  if (!in) throw Error("snapshot truncated while reading arrays");
}

}  // namespace

void write_snapshot(const FieldState& s, const std::string& path) {
  s.check_grid();
  json meta;
  meta["t"] = s.t;
  meta["L"] = s.grid.L;
  meta["n"] = s.grid.n;
  meta["cfl_safety"] = s.grid.cfl_safety;
  meta["m"] = s.m;
  meta["p"] = s.p;
  meta["eps"] = s.eps;
  meta["delta"] = s.delta;
  meta["u0"] = {s.u0[0], s.u0[1], s.u0[2]};
  meta["arrays"] = {"phi_re", "phi_im", "pi_re", "pi_im", "a0", "a1", "a2", "a3",
                    "adot0", "adot1", "adot2", "adot3"};
  const std::string js = meta.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open snapshot for writing: " + path);
  out.write("MKG1", 4);
  const std::uint64_t len = js.size();
  out.write(reinterpret_cast<const char*>(&len), 8);
  out.write(js.data(), std::streamsize(js.size()));

  const std::int64_t N = s.grid.size();
  std::vector<double> buf(N);
  auto write_part = [&](auto getter) {
    for (std::int64_t i = 0; i < N; ++i) buf[std::size_t(i)] = getter(i);
    write_doubles(out, buf.data(), N);
  };
  write_part([&](std::int64_t i) { return std::real(s.phi[i]); });
  write_part([&](std::int64_t i) { return std::imag(s.phi[i]); });
  write_part([&](std::int64_t i) { return std::real(s.pi[i]); });
  write_part([&](std::int64_t i) { return std::imag(s.pi[i]); });
  for (int nu = 0; nu < 4; ++nu) write_doubles(out, s.a[nu].data(), N);
  for (int nu = 0; nu < 4; ++nu) write_doubles(out, s.adot[nu].data(), N);
  if (!out) throw Error("snapshot write failed: " + path);
}

FieldState read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open snapshot: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "MKG1", 4) != 0)
    throw Error("not an MKG1 snapshot: " + path);
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), 8);
  std::string js(len, '\0');
  in.read(js.data(), std::streamsize(len));
  if (!in) throw Error("snapshot truncated in metadata: " + path);
  const json meta = json::parse(js);

  FieldState s;
  s.t = meta.at("t").get<double>();
  s.grid.L = meta.at("L").get<double>();
  s.grid.n = meta.at("n").get<int>();
  s.grid.cfl_safety = meta.value("cfl_safety", 0.45);
  s.m = meta.at("m").get<double>();
  s.p = meta.at("p").get<double>();
  s.eps = meta.at("eps").get<double>();
  s.delta = meta.at("delta").get<double>();
  const auto u0 = meta.at("u0");
  for (int i = 0; i < 3; ++i) s.u0[i] = u0.at(i).get<double>();

  const std::int64_t N = s.grid.size();
  std::vector<double> re(N), im(N);
  s.phi.resize(N);
  s.pi.resize(N);
  read_doubles(in, re.data(), N);
  read_doubles(in, im.data(), N);
  for (std::int64_t i = 0; i < N; ++i) s.phi[i] = Complex(re[std::size_t(i)], im[std::size_t(i)]);
  read_doubles(in, re.data(), N);
  read_doubles(in, im.data(), N);
  for (std::int64_t i = 0; i < N; ++i) s.pi[i] = Complex(re[std::size_t(i)], im[std::size_t(i)]);
  for (int nu = 0; nu < 4; ++nu) {
    s.a[nu].resize(N);
    read_doubles(in, s.a[nu].data(), N);
  }
  for (int nu = 0; nu < 4; ++nu) {
    s.adot[nu].resize(N);
    read_doubles(in, s.adot[nu].data(), N);
  }
  return s;
}

std::vector<std::string> list_snapshots(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string name = e.path().filename().string();
    if (name.rfind("snapshot_", 0) == 0 && e.path().extension() == ".bin")
      files.push_back(e.path().string());
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace mkg
