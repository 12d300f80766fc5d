#ifndef GAUSSGEO_IO_HPP
#define GAUSSGEO_IO_HPP

// JSON schemas (row-major nested arrays):
//   point   {"n": int, "sigma": [[...]], "mu": [...]}
//   tangent {"n": int, "A0": [[...]], "a0": [...]}
//   pair    {"p": point, "q": point}
// CSV: "t,sigma_11,...,sigma_nn,mu_1,...,mu_n" and "t,Q_11,...,Q_nn,r_1,...,r_n",
// one row per sample, 17 significant digits.

#include <nlohmann/json.hpp>

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gaussgeo/geodesic.hpp"
#include "gaussgeo/laxflow.hpp"
#include "gaussgeo/manifold.hpp"

namespace gaussgeo::io {

using json = nlohmann::json;

inline constexpr double kSymmetryParseTol = 1e-12;

namespace detail {

inline const json & field(const json & j, const char * key)
{
  if (!j.is_object() || !j.contains(key)) {
    throw InputError(std::string("missing field \"") + key + "\"");
  }
  return j.at(key);
}

inline Index dimension(const json & j)
{
  const json & n = field(j, "n");
  if (!n.is_number_integer() || n.get<long long>() < 1) {
    throw InputError("\"n\" must be a positive integer");
  }
  return n.get<Index>();
}

inline double number(const json & x, const std::string & what)
{
  if (!x.is_number()) {
    throw InputError(what + ": expected a number");
  }
  return x.get<double>();
}

}  // namespace detail

inline Matrix matrix_from_json(const json & j, Index rows, Index cols, const std::string & what)
{
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
    throw InputError(what + ": expected " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json & row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw InputError(what + ": row " + std::to_string(i) + " must have " + std::to_string(cols) + " entries");
    }
    for (Index k = 0; k < cols; ++k) {
      m(i, k) = detail::number(row[static_cast<std::size_t>(k)], what);
    }
  }
  return m;
}

inline Vector vector_from_json(const json & j, Index size, const std::string & what)
{
  if (!j.is_array() || static_cast<Index>(j.size()) != size) {
    throw InputError(what + ": expected " + std::to_string(size) + " entries");
  }
  Vector v(size);
  for (Index i = 0; i < size; ++i) {
    v(i) = detail::number(j[static_cast<std::size_t>(i)], what);
  }
  return v;
}

inline json matrix_to_json(const Matrix & m)
{
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) {
      row.push_back(m(i, k));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_to_json(const Vector & v)
{
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    out.push_back(v(i));
  }
  return out;
}

inline GaussianPoint point_from_json(const json & j)
{
  const Index n = detail::dimension(j);
  const Matrix sigma = matrix_from_json(detail::field(j, "sigma"), n, n, "sigma");
  const Vector mu = vector_from_json(detail::field(j, "mu"), n, "mu");
  try {
    return {SpdMatrix(SymMatrix::checked(sigma, kSymmetryParseTol)), mu};
  } catch (const NotPositiveDefinite &) {
    throw InputError("sigma is not positive definite");
  }
}

inline json point_to_json(const GaussianPoint & p)
{
  return {{"n", p.dim()}, {"sigma", matrix_to_json(p.sigma().matrix())}, {"mu", vector_to_json(p.mu())}};
}

inline TangentN tangent_from_json(const json & j)
{
  const Index n = detail::dimension(j);
  const Matrix a = matrix_from_json(detail::field(j, "A0"), n, n, "A0");
  return {SymMatrix::checked(a, kSymmetryParseTol), vector_from_json(detail::field(j, "a0"), n, "a0")};
}

inline json tangent_to_json(const TangentN & x)
{
  return {{"n", x.dim()}, {"A0", matrix_to_json(x.dsigma.matrix())}, {"a0", vector_to_json(x.dmu)}};
}

inline std::pair<GaussianPoint, GaussianPoint> pair_from_json(const json & j)
{
  auto p = point_from_json(detail::field(j, "p"));
  auto q = point_from_json(detail::field(j, "q"));
  if (p.dim() != q.dim()) {
    throw InputError("points p and q have different dimensions");
  }
  return {std::move(p), std::move(q)};
}

// --- CSV ------------------------------------------------------------------------

inline std::string format_double(double x)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline void write_header(std::ostream & os, const char * mat, const char * vec, Index n)
{
  os << 't';
  for (Index i = 1; i <= n; ++i) {
    for (Index k = 1; k <= n; ++k) {
      os << ',' << mat << '_' << i << k;
    }
  }
  for (Index i = 1; i <= n; ++i) {
    os << ',' << vec << '_' << i;
  }
  os << '\n';
}

inline void write_row(std::ostream & os, double t, const Matrix & m, const Vector & v)
{
  os << format_double(t);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index k = 0; k < m.cols(); ++k) {
      os << ',' << format_double(m(i, k));
    }
  }
  for (Index i = 0; i < v.size(); ++i) {
    os << ',' << format_double(v(i));
  }
  os << '\n';
}

}  // namespace detail

inline void write_trajectory_csv(std::ostream & os, const std::vector<double> & ts,
                                 const std::vector<GaussianPoint> & points)
{
  const Index n = points.empty() ? 0 : points.front().dim();
  detail::write_header(os, "sigma", "mu", n);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    detail::write_row(os, ts[i], points[i].sigma().matrix(), points[i].mu());
  }
}

inline void write_trajectory_csv(std::ostream & os, const GeodesicTrajectory & traj)
{
  write_trajectory_csv(os, traj.ts, traj.points);
}

inline void write_lax_csv(std::ostream & os, const LaxTrajectory & traj)
{
  detail::write_header(os, "Q", "r", traj.source.dim());
  for (std::size_t i = 0; i < traj.ts.size(); ++i) {
    detail::write_row(os, traj.ts[i], traj.states[i].q, traj.states[i].r);
  }
}

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(std::istream & is)
{
  CsvTable table;
  std::string line;
  auto split = [](const std::string & s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cells.push_back(cell);
    }
    return cells;
  };
  if (!std::getline(is, line)) {
    throw InputError("CSV: missing header");
  }
  table.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) {
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw InputError("CSV: row has " + std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(table.header.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto & c : cells) {
      try {
        row.push_back(std::stod(c));
      } catch (const std::exception &) {
        throw InputError("CSV: not a number: " + c);
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

/// Inverse of write_trajectory_csv; n is deduced from the column count 1 + n^2 + n.
inline std::pair<std::vector<double>, std::vector<GaussianPoint>> read_trajectory_csv(std::istream & is)
{
  const CsvTable table = read_csv(is);
  Index n = 0;
  while (1 + n * n + n < static_cast<Index>(table.header.size())) {
    ++n;
  }
  if (n == 0 || 1 + n * n + n != static_cast<Index>(table.header.size())) {
    throw InputError("CSV: column count does not match a trajectory of any dimension");
  }
  std::vector<double> ts;
  std::vector<GaussianPoint> points;
  for (const auto & row : table.rows) {
    ts.push_back(row[0]);
    Matrix sigma(n, n);
    Vector mu(n);
    for (Index i = 0; i < n; ++i) {
      for (Index k = 0; k < n; ++k) {
        sigma(i, k) = row[static_cast<std::size_t>(1 + i * n + k)];
      }
      mu(i) = row[static_cast<std::size_t>(1 + n * n + i)];
    }
    points.emplace_back(SpdMatrix(sigma), mu);
  }
  return {std::move(ts), std::move(points)};
}

}  // namespace gaussgeo::io

#endif  // GAUSSGEO_IO_HPP
