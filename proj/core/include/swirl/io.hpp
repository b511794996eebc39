#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swirl/characteristics.hpp"
#include "swirl/fit.hpp"
#include "swirl/retrieval.hpp"

namespace swirl {

struct RunConfig;

/// Malformed input file; the message names the source and line.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that reads back to the same double; "nan"/"inf"
/// are never produced by the writers (unset values become empty cells).
std::string format_number(double x);

/// Reads `r,z,v,sigma` CSV. Lines starting with '#' and blank lines are
/// skipped; the first remaining line must be the header. Throws ParseError
/// on a malformed row, a non-positive sigma, or a file with no rows.
std::vector<VelocityObservation> read_observations(std::istream& in,
                                                   std::string_view source = "<input>");
std::vector<VelocityObservation> read_observations(const std::filesystem::path& path);

/// "# " comment lines carrying the resolved config (one-line JSON) and the
/// seed, written at the top of every output file.
std::string provenance_header(const RunConfig& config, std::uint64_t seed);

void write_observations(std::ostream& out, const std::vector<VelocityObservation>& obs,
                        std::string_view header = {});
/// Columns r,z,psi,u,v,w,flag with flag 0 observable, 1 reachable, 2 void,
/// 3 boundary-limited.
void write_field(std::ostream& out, const RetrievedField& field, std::string_view header = {});
/// Columns r,z,flag.
void write_void_map(std::ostream& out, const VoidMap& map, std::string_view header = {});
/// Columns r,z.
void write_polyline(std::ostream& out, const std::vector<Point>& points,
                    std::string_view header = {});

/// Writes `text` to `path` in binary mode, creating parent directories.
/// Throws std::runtime_error on failure.
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace swirl
