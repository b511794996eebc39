#include "swirl/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "swirl/config.hpp"

namespace swirl {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  for (;;) {
    const auto comma = line.find(',');
    cells.push_back(trim(line.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return cells;
}

bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && end == s.data() + s.size() && std::isfinite(out);
}

void put_cell(std::string& line, double x) {
  if (std::isfinite(x)) line += format_number(x);
}

void put_header(std::ostream& out, std::string_view header) {
  out << header;
  if (!header.empty() && header.back() != '\n') out << '\n';
}

}  // namespace

std::string format_number(double x) {
  if (x == 0.0) return "0";
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), end);
}

std::vector<VelocityObservation> read_observations(std::istream& in, std::string_view source) {
  const std::string where(source);
  auto fail = [&](std::size_t line, const std::string& what) {
    throw ParseError(where + ":" + std::to_string(line) + ": " + what);
  };
  std::vector<VelocityObservation> obs;
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split(line);
    if (!header_seen) {
      if (cells.size() != 4 || cells[0] != "r" || cells[1] != "z" || cells[2] != "v" ||
          cells[3] != "sigma") {
        fail(line_no, "expected header 'r,z,v,sigma'");
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != 4) {
      fail(line_no, "expected 4 fields, got " + std::to_string(cells.size()));
    }
    std::array<double, 4> v{};
    static constexpr std::array<const char*, 4> names{"r", "z", "v", "sigma"};
    for (std::size_t k = 0; k < 4; ++k) {
      if (!parse_double(cells[k], v[k])) {
        fail(line_no, std::string("field '") + names[k] + "' is not a finite number: '" +
                          std::string(cells[k]) + "'");
      }
    }
    if (v[0] < 0.0) fail(line_no, "r must be >= 0");
    if (v[1] < 0.0) fail(line_no, "z must be >= 0");
    if (!(v[3] > 0.0)) fail(line_no, "sigma must be > 0");
    obs.push_back({v[0], v[1], v[2], v[3]});
  }
  if (!header_seen) throw ParseError(where + ": empty file (missing header 'r,z,v,sigma')");
  if (obs.empty()) throw ParseError(where + ": no observations");
  return obs;
}

std::vector<VelocityObservation> read_observations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open");
  return read_observations(in, path.string());
}

std::string provenance_header(const RunConfig& config, std::uint64_t seed) {
  return "# config: " + dump_config(config, -1) + "\n# seed: " + std::to_string(seed) + "\n";
}

void write_observations(std::ostream& out, const std::vector<VelocityObservation>& obs,
                        std::string_view header) {
  put_header(out, header);
  out << "r,z,v,sigma\n";
  std::string line;
  for (const VelocityObservation& o : obs) {
    line.clear();
    for (double x : {o.r, o.z, o.v_obs}) {
      line += format_number(x);
      line += ',';
    }
    line += format_number(o.sigma);
    line += '\n';
    out << line;
  }
}

void write_field(std::ostream& out, const RetrievedField& f, std::string_view header) {
  put_header(out, header);
  out << "r,z,psi,u,v,w,flag\n";
  const Grid& g = f.grid;
  std::string line;
  for (int j = 0; j < g.nz; ++j) {
    for (int i = 0; i < g.nr; ++i) {
      const std::size_t c = g.index(i, j);
      line.clear();
      line += format_number(g.r(i));
      line += ',';
      line += format_number(g.z(j));
      for (double x : {f.psi[c], f.u[c], f.v[c], f.w[c]}) {
        line += ',';
        put_cell(line, x);
      }
      line += ',';
      line += std::to_string(static_cast<int>(f.flag[c]));
      line += '\n';
      out << line;
    }
  }
}

void write_void_map(std::ostream& out, const VoidMap& map, std::string_view header) {
  put_header(out, header);
  out << "r,z,flag\n";
  const Grid& g = map.grid;
  for (int j = 0; j < g.nz; ++j) {
    for (int i = 0; i < g.nr; ++i) {
      out << format_number(g.r(i)) << ',' << format_number(g.z(j)) << ','
          << static_cast<int>(map.at(i, j)) << '\n';
    }
  }
}

void write_polyline(std::ostream& out, const std::vector<Point>& points,
                    std::string_view header) {
  put_header(out, header);
  out << "r,z\n";
  for (const Point& p : points) out << format_number(p.r) << ',' << format_number(p.z) << '\n';
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace swirl
