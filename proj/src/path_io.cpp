#include "homog/path_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace homog {

static_assert(std::endian::native == std::endian::little, "path files are written in host order");

namespace {

constexpr char kMagic[8] = {'H', 'P', 'A', 'T', 'H', 'S', '0', '1'};

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("path file is truncated");
  return v;
}

void put_points(std::ostream& out, const std::vector<Point>& pts, int d) {
  for (const auto& p : pts)
    for (int a = 0; a < d; ++a) put(out, p[a]);
}

std::vector<Point> take_points(std::istream& in, std::uint64_t m, int d) {
  std::vector<Point> pts(m, Point{});
  for (auto& p : pts)
    for (int a = 0; a < d; ++a) p[a] = take<double>(in);
  return pts;
}

std::uint32_t flags_of(const PathEnsemble& e) {
  std::uint32_t f = 0;
  if (e.paths.empty()) return f;
  const auto& p = e.paths.front();
  if (!p.clock.empty()) f |= 1;
  if (!p.timechanged.empty()) f |= 2;
  if (!p.martingale.empty()) f |= 4;
  return f;
}

}  // namespace

void write_paths_binary(std::ostream& out, const PathEnsemble& e) {
  const int d = e.dim;
  const std::uint32_t flags = flags_of(e);
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(e.n));
  put<double>(out, e.config.dt);
  put<std::uint64_t>(out, e.paths.size());
  put<std::uint32_t>(out, flags);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(e.config.record_every));
  for (const auto& p : e.paths) {
    put<std::uint64_t>(out, p.times.size());
    for (double t : p.times) put(out, t);
    put_points(out, p.positions, d);
    put_points(out, p.projected, d);
    if (flags & 1)
      for (double a : p.clock) put(out, a);
    if (flags & 2) {
      put(out, p.timechanged_step);
      put<std::uint64_t>(out, p.timechanged.size());
      put_points(out, p.timechanged, d);
    }
    if (flags & 4) {
      put_points(out, p.martingale, d);
      for (const auto& b : p.bracket_pred)
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) put(out, b[i][j]);
    }
  }
}

PathEnsemble read_paths_binary(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw std::runtime_error("not a path file");
  PathEnsemble e;
  e.dim = static_cast<int>(take<std::uint32_t>(in));
  if (e.dim < 1 || e.dim > kMaxDim) throw std::runtime_error("path file has a bad dimension");
  e.n = static_cast<int>(take<std::uint32_t>(in));
  e.config.dt = take<double>(in);
  const auto num = take<std::uint64_t>(in);
  const auto flags = take<std::uint32_t>(in);
  e.config.record_every = take<std::uint32_t>(in);
  e.config.num_paths = num;
  const int d = e.dim;
  e.paths.resize(num);
  for (auto& p : e.paths) {
    const auto m = take<std::uint64_t>(in);
    p.times.resize(m);
    for (auto& t : p.times) t = take<double>(in);
    p.positions = take_points(in, m, d);
    p.projected = take_points(in, m, d);
    if (flags & 1) {
      p.clock.resize(m);
      for (auto& a : p.clock) a = take<double>(in);
    }
    if (flags & 2) {
      p.timechanged_step = take<double>(in);
      p.timechanged = take_points(in, take<std::uint64_t>(in), d);
    }
    if (flags & 4) {
      p.martingale = take_points(in, m, d);
      p.bracket_pred.assign(m, Matrix3{});
      for (auto& b : p.bracket_pred)
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) b[i][j] = take<double>(in);
    }
  }
  return e;
}

void write_paths_csv(std::ostream& out, const PathEnsemble& e) {
  const int d = e.dim;
  const std::uint32_t flags = flags_of(e);
  out << "path,sample,t";
  for (int a = 1; a <= d; ++a) out << ",x_" << a;
  for (int a = 1; a <= d; ++a) out << ",y_" << a;
  if (flags & 1) out << ",clock";
  if (flags & 4)
    for (int a = 1; a <= d; ++a) out << ",m_" << a;
  out << '\n';
  const auto old = out.precision(17);
  for (std::size_t p = 0; p < e.paths.size(); ++p) {
    const auto& r = e.paths[p];
    for (std::size_t k = 0; k < r.times.size(); ++k) {
      out << p << ',' << k << ',' << r.times[k];
      for (int a = 0; a < d; ++a) out << ',' << r.positions[k][a];
      for (int a = 0; a < d; ++a) out << ',' << r.projected[k][a];
      if (flags & 1) out << ',' << r.clock[k];
      if (flags & 4)
        for (int a = 0; a < d; ++a) out << ',' << r.martingale[k][a];
      out << '\n';
    }
  }
  out.precision(old);
}

}  // namespace homog
