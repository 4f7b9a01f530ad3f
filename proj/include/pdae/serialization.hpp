#pragma once

#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdae/errors.hpp"
#include "pdae/field.hpp"
#include "pdae/grid.hpp"
#include "pdae/index.hpp"
#include "pdae/problem.hpp"
#include "pdae/splitting.hpp"
#include "pdae/stability.hpp"
#include "pdae/system.hpp"
#include "pdae/types.hpp"

namespace pdae {

// All numeric text output goes through one formatter so reruns are
// byte-identical.
inline std::string fmt_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) a.push_back(m(i, j));
  return a;
}

inline Matrix matrix_from_json(const nlohmann::json& a, int n,
                               const std::string& name) {
  if (!a.is_array() || static_cast<int>(a.size()) != n * n)
    throw ConfigError("system: " + name + " must be a flat row-major array of " +
                      std::to_string(n * n) + " numbers");
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto& v = a[static_cast<size_t>(i) * n + j];
      if (!v.is_number())
        throw ConfigError("system: " + name + " has a non-numeric entry");
      m(i, j) = v.get<double>();
    }
  return m;
}

inline nlohmann::json system_to_json(const PDAESystem& s) {
  nlohmann::json j;
  j["n"] = s.n;
  j["A"] = matrix_to_json(s.A);
  j["B"] = matrix_to_json(s.B);
  j["D"] = matrix_to_json(s.D);
  j["C0"] = matrix_to_json(s.C0);
  nlohmann::json slices = nlohmann::json::array();
  for (const Matrix& c : s.C1) slices.push_back(matrix_to_json(c));
  j["C1"] = slices;
  return j;
}

inline PDAESystem system_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j["n"].is_number_integer())
    throw ConfigError("system: need an object with an integer n");
  const int n = j["n"].get<int>();
  if (n < 1) throw ConfigError("system: n must be at least 1");
  for (const char* key : {"A", "B", "D", "C0", "C1"})
    if (!j.contains(key))
      throw ConfigError(std::string("system: missing ") + key);
  if (!j["C1"].is_array() || static_cast<int>(j["C1"].size()) != n)
    throw ConfigError("system: C1 must hold n slices");
  std::vector<Matrix> C1;
  for (int k = 0; k < n; ++k)
    C1.push_back(matrix_from_json(j["C1"][k], n, "C1[" + std::to_string(k) + "]"));
  return PDAESystem(matrix_from_json(j["A"], n, "A"),
                    matrix_from_json(j["B"], n, "B"),
                    matrix_from_json(j["D"], n, "D"),
                    matrix_from_json(j["C0"], n, "C0"), std::move(C1));
}

inline void write_matrix_csv(std::ostream& os, const Matrix& m) {
  os << "i,j,value\n";
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      os << i << ',' << j << ',' << fmt_g9(m(i, j)) << '\n';
}

namespace detail {

// Boundary row values: Dirichlet components take their datum, Free ones the
// linear extrapolation from the two nearest interior points.
inline double boundary_value(const StateField& U, const BoundarySpec& bv,
                             int comp, int s, double t) {
  const BoundaryEntry& e = bv.side(s)[comp - 1];
  if (e.kind == BoundaryKind::Dirichlet) return e.value(t);
  const int N = U.M - 1;
  if (N == 1) return U.at(comp, 1);
  return s == 0 ? 2.0 * U.at(comp, 1) - U.at(comp, 2)
                : 2.0 * U.at(comp, N) - U.at(comp, N - 1);
}

}  // namespace detail

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                                 const SpaceGrid& grid,
                                 const BoundarySpec& bv) {
  if (traj.states.empty())
    throw ConfigError("write_trajectory_csv: empty trajectory");
  const int n = traj.states.front().n;
  os << "t,x";
  for (int i = 1; i <= n; ++i) os << ",u" << i;
  os << '\n';
  for (const StateField& U : traj.states) {
    const double t = traj.tau * static_cast<double>(U.time_step);
    auto row = [&](double x, auto&& value) {
      os << fmt_g9(t) << ',' << fmt_g9(x);
      for (int i = 1; i <= n; ++i) os << ',' << fmt_g9(value(i));
      os << '\n';
    };
    row(0.0, [&](int i) { return detail::boundary_value(U, bv, i, 0, t); });
    for (int k = 1; k <= grid.M - 1; ++k)
      row(grid.x(k), [&](int i) { return U.at(i, k); });
    row(1.0, [&](int i) { return detail::boundary_value(U, bv, i, 1, t); });
  }
}

inline void write_refinement_csv(std::ostream& os,
                                 const std::vector<RefinementRow>& rows) {
  os << "N,CFL2,e1,e2,order1,order2\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const RefinementRow& r : rows) {
    const int n = static_cast<int>(r.e.size());
    const double cfl2 = n >= 2 ? r.cfl[1] : (n == 1 ? r.cfl[0] : nan);
    os << r.N << ',' << fmt_g9(cfl2) << ',' << fmt_g9(n >= 1 ? r.e[0] : nan)
       << ',' << fmt_g9(n >= 2 ? r.e[1] : nan) << ','
       << fmt_g9(n >= 1 ? r.order[0] : nan) << ','
       << fmt_g9(n >= 2 ? r.order[1] : nan) << '\n';
  }
}

inline nlohmann::json index_to_json(const IndexCertificate& c) {
  nlohmann::json j;
  j["verdict"] = to_string(c.verdict);
  j["order"] = c.order;
  j["M"] = {c.M_coarse, c.M_fine};
  j["sigma_min"] = {c.sigma_min_coarse, c.sigma_min_fine};
  j["ratio"] = c.ratio;
  j["floor"] = c.floor;
  j["row_plan"] = c.row_plan;
  return j;
}

inline nlohmann::json stability_to_json(const StabilityReport& r) {
  nlohmann::json j;
  j["M"] = r.M;
  j["tau"] = r.tau;
  j["h"] = r.h;
  j["g0_inv_norm"] = r.g0_inv_norm;
  j["g1_norm_bound"] = r.g1_norm_bound;
  j["delta0"] = r.delta0;
  j["pass"] = r.pass;
  j["solution_bound"] = r.solution_bound;
  j["singular_modes"] = r.singular_modes;
  return j;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open output file: " + path);
  os << body;
  if (!os) throw ConfigError("failed writing output file: " + path);
}

}  // namespace pdae
