#pragma once

// Mesh, point, record and value files.
//
// Text mesh: a line "fpx-mesh v1", a line "d d_r p N_E", then for every
// element (p+1)^{d_r} lines of d coordinates in lexicographic node order.
// Binary mesh: the 8 bytes "FPXMESH1", int32 d, d_r, p, uint64 N_E, then the
// same coordinates as little-endian doubles.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fpx/engine.hpp"
#include "fpx/error.hpp"
#include "fpx/mesh.hpp"
#include "fpx/serialize.hpp"

namespace fpx {

inline constexpr std::string_view kMeshTextMagic = "fpx-mesh v1";
inline constexpr std::string_view kMeshBinaryMagic = "FPXMESH1";

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write to '" + path + "' failed");
}

inline void check_header(int d, int dr, int p, std::uint64_t ne) {
  if (d < 2 || d > 3 || dr < 1 || dr > d || p < 1 || p > kMaxOrder)
    throw FormatError("mesh header has an unsupported shape");
  if (ne > (std::uint64_t{1} << 32)) throw FormatError("mesh header element count too large");
}

/// Splits a CSV or whitespace separated line into numbers.
inline bool parse_numbers(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ',' || line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    const char* begin = line.c_str() + i;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) return false;
    out.push_back(v);
    i += static_cast<std::size_t>(end - begin);
    if (i < line.size() && line[i] != ',' && line[i] != ' ' && line[i] != '\t' && line[i] != '\r')
      return false;
  }
  return true;
}

}  // namespace detail

inline std::string mesh_to_text(const Mesh& m) {
  std::string s(kMeshTextMagic);
  s += "\n" + std::to_string(m.dim) + " " + std::to_string(m.ref_dim) + " " + std::to_string(m.order) +
       " " + std::to_string(m.size()) + "\n";
  for (const auto& e : m.elements)
    for (int k = 0; k < e.node_count(); ++k) {
      for (int c = 0; c < m.dim; ++c) {
        if (c) s += ' ';
        s += detail::fmt_double(e.component(c)[k]);
      }
      s += '\n';
    }
  return s;
}

inline std::string mesh_to_binary(const Mesh& m) {
  ByteWriter w;
  w.put_bytes(kMeshBinaryMagic);
  for (int v : {m.dim, m.ref_dim, m.order}) w.put<std::int32_t>(v);
  w.put<std::uint64_t>(m.size());
  for (const auto& e : m.elements)
    for (int k = 0; k < e.node_count(); ++k)
      for (int c = 0; c < m.dim; ++c) w.put(e.component(c)[k]);
  return w.take();
}

/// Reads either format, chosen by the leading magic.
inline Mesh parse_mesh(std::string_view bytes) {
  Mesh m;
  if (bytes.substr(0, kMeshBinaryMagic.size()) == kMeshBinaryMagic) {
    ByteReader r(bytes.substr(kMeshBinaryMagic.size()));
    m.dim = r.get<std::int32_t>();
    m.ref_dim = r.get<std::int32_t>();
    m.order = r.get<std::int32_t>();
    const auto ne = r.get<std::uint64_t>();
    detail::check_header(m.dim, m.ref_dim, m.order, ne);
    const auto per = static_cast<std::uint64_t>(ipow(m.order + 1, m.ref_dim)) * m.dim * sizeof(double);
    if (r.remaining() != ne * per) throw FormatError("binary mesh size does not match its header");
    m.elements.reserve(ne);
    for (std::uint64_t e = 0; e < ne; ++e) {
      auto g = ElementGeometry::zeros(m.dim, m.ref_dim, m.order);
      for (int k = 0; k < g.node_count(); ++k)
        for (int c = 0; c < m.dim; ++c) g.component(c)[k] = r.get<double>();
      m.elements.push_back(std::move(g));
    }
    return m;
  }
  std::istringstream in{std::string(bytes)};
  std::string line;
  if (!std::getline(in, line) || line.substr(0, kMeshTextMagic.size()) != kMeshTextMagic)
    throw FormatError("not a mesh file");
  std::vector<double> nums;
  if (!std::getline(in, line) || !detail::parse_numbers(line, nums) || nums.size() != 4)
    throw FormatError("mesh header line must hold d d_r p N_E");
  for (double v : nums)
    if (v != static_cast<double>(static_cast<std::int64_t>(v)) || v < 0)
      throw FormatError("mesh header values must be non-negative integers");
  m.dim = static_cast<int>(nums[0]);
  m.ref_dim = static_cast<int>(nums[1]);
  m.order = static_cast<int>(nums[2]);
  const auto ne = static_cast<std::uint64_t>(nums[3]);
  detail::check_header(m.dim, m.ref_dim, m.order, ne);
  std::size_t lineno = 2;
  for (std::uint64_t e = 0; e < ne; ++e) {
    auto g = ElementGeometry::zeros(m.dim, m.ref_dim, m.order);
    for (int k = 0; k < g.node_count(); ++k) {
      ++lineno;
      if (!std::getline(in, line)) throw FormatError("mesh file ends early at line " + std::to_string(lineno));
      if (!detail::parse_numbers(line, nums) || static_cast<int>(nums.size()) != m.dim)
        throw FormatError("mesh line " + std::to_string(lineno) + " needs " + std::to_string(m.dim) +
                          " numbers");
      for (int c = 0; c < m.dim; ++c) g.component(c)[k] = nums[c];
    }
    m.elements.push_back(std::move(g));
  }
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) throw FormatError("trailing data in mesh file");
  return m;
}

inline Mesh read_mesh_file(const std::string& path) { return parse_mesh(detail::slurp(path)); }

inline void write_mesh_file(const std::string& path, const Mesh& m, bool binary = false) {
  detail::spit(path, binary ? mesh_to_binary(m) : mesh_to_text(m));
}

/// One point per line with dim columns. Blank lines and lines starting with
/// '#' are skipped, as is a non-numeric first line (a header).
inline std::vector<Point> parse_points(std::string_view text, int dim) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<Point> pts;
  std::vector<double> nums;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    if (!detail::parse_numbers(line, nums)) {
      if (lineno == 1) continue;
      throw FormatError("points line " + std::to_string(lineno) + " is not numeric");
    }
    if (static_cast<int>(nums.size()) != dim)
      throw FormatError("points line " + std::to_string(lineno) + " has " + std::to_string(nums.size()) +
                        " columns, expected " + std::to_string(dim));
    Point p{};
    for (int i = 0; i < dim; ++i) p[i] = nums[i];
    pts.push_back(p);
  }
  return pts;
}

inline std::string points_to_csv(std::span<const Point> pts, int dim) {
  std::string s;
  for (const auto& p : pts) {
    for (int i = 0; i < dim; ++i) {
      if (i) s += ',';
      s += detail::fmt_double(p[i]);
    }
    s += '\n';
  }
  return s;
}

/// Header "idx,code,rank,elem,r0..,dist". NOT_FOUND rows carry -1 for rank
/// and element and nan for the coordinates and distance.
inline std::string records_to_csv(std::span<const FindRecord> recs, int ref_dim) {
  std::string s = "idx,code,rank,elem";
  for (int a = 0; a < ref_dim; ++a) s += ",r" + std::to_string(a);
  s += ",dist\n";
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    const bool nf = r.code == PointCode::not_found;
    s += std::to_string(i) + "," + to_string(r.code) + "," + std::to_string(r.rank) + "," +
         std::to_string(r.elem);
    for (int a = 0; a < ref_dim; ++a) s += "," + (nf ? std::string("nan") : detail::fmt_double(r.r[a]));
    s += "," + (nf ? std::string("nan") : detail::fmt_double(r.dist)) + "\n";
  }
  return s;
}

inline std::vector<FindRecord> parse_records(std::string_view text, int ref_dim) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<FindRecord> recs;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line.rfind("idx", 0) == 0)) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    const std::string where = "records line " + std::to_string(lineno);
    if (static_cast<int>(cols.size()) != 5 + ref_dim) throw FormatError(where + " has the wrong column count");
    FindRecord r;
    try {
      if (std::stoll(cols[0]) != static_cast<long long>(recs.size())) throw FormatError(where + ": idx out of sequence");
      const auto code = parse_point_code(cols[1]);
      if (!code) throw FormatError(where + ": unknown code '" + cols[1] + "'");
      r.code = *code;
      r.rank = std::stoi(cols[2]);
      r.elem = std::stoi(cols[3]);
      for (int a = 0; a < ref_dim; ++a) r.r[a] = std::stod(cols[4 + a]);
      r.dist = std::stod(cols[4 + ref_dim]);
    } catch (const std::logic_error&) {
      throw FormatError(where + " is malformed");
    }
    if (r.code != PointCode::not_found && (r.rank < 0 || r.elem < 0))
      throw FormatError(where + ": found record without rank or element");
    recs.push_back(r);
  }
  return recs;
}

/// Header "idx,v0..". NaN values (points not found) are written as "nan".
inline std::string values_to_csv(std::span<const double> vals, int components) {
  std::string s = "idx";
  for (int c = 0; c < components; ++c) s += ",v" + std::to_string(c);
  s += "\n";
  const std::size_t n = components ? vals.size() / components : 0;
  for (std::size_t i = 0; i < n; ++i) {
    s += std::to_string(i);
    for (int c = 0; c < components; ++c) {
      const double v = vals[i * components + c];
      s += "," + (std::isnan(v) ? std::string("nan") : detail::fmt_double(v));
    }
    s += "\n";
  }
  return s;
}

}  // namespace fpx
