#pragma once
// Reports (JSON), meshes (OBJ, binary PLY), sweep tables and reloading a model
// from stored artifacts. All number formatting goes through std::to_chars or
// nlohmann::json, neither of which depends on the locale.

#include <algorithm>
#include <bit>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cmcaf/family_solver.hpp"
#include "cmcaf/mesh.hpp"
#include "cmcaf/verifier.hpp"

namespace cmcaf {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridInfo {
  std::size_t u_samples = 0, v_samples = 0;
  friend bool operator==(const GridInfo&, const GridInfo&) = default;
};

struct AnnulusReport {
  int n = 2;
  double mu = 0;
  double alpha = 1, beta = 1, gamma = 1;
  double sigma = 0, per = 0, u_star = 0, tau = 0, u1 = 0;
  double boundary_radius = 0;
  double H_rescaled = 0;
  std::optional<double> necksize_unscaled;
  double u_extent_factor = 1;
  double closure_residual = 0;
  std::vector<Verdict> verdicts;
  GridInfo grid;
  std::string tool_version = kToolVersion;

  friend bool operator==(const AnnulusReport&, const AnnulusReport&) = default;
};

inline AnnulusReport make_report(const AnnulusModel& m, std::vector<Verdict> verdicts) {
  AnnulusReport r;
  r.n = m.fp.n;
  r.mu = m.fp.mu;
  r.alpha = m.fp.param.alpha();
  r.beta = m.fp.param.beta();
  r.gamma = m.fp.param.gamma();
  r.sigma = m.fp.sigma;
  r.per = m.fp.per;
  r.u_star = m.fp.u_star;
  r.tau = m.fp.tau;
  r.u1 = m.fp.u1;
  r.boundary_radius = m.boundary_radius;
  r.H_rescaled = m.mean_curvature_rescaled;
  r.necksize_unscaled = m.necksize_unscaled;
  r.u_extent_factor = m.u_extent_factor;
  r.closure_residual = m.closure_residual;
  r.verdicts = std::move(verdicts);
  r.grid = {m.nu, m.nv};
  return r;
}

namespace detail {

// JSON has no inf/nan; they are written as null and read back as nan.
inline nlohmann::json json_number(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline double json_double(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nan("");
  return v.get<double>();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace detail

inline nlohmann::json to_json(const Verdict& v) {
  return {{"name", v.name},
          {"residual", detail::json_number(v.residual)},
          {"tolerance", detail::json_number(v.tolerance)},
          {"pass", v.pass},
          {"lower_bound", v.lower_bound},
          {"details", v.details}};
}

inline Verdict verdict_from_json(const nlohmann::json& j) {
  Verdict v;
  v.name = j.at("name").get<std::string>();
  v.residual = detail::json_double(j, "residual");
  v.tolerance = detail::json_double(j, "tolerance");
  v.pass = j.at("pass").get<bool>();
  v.lower_bound = j.at("lower_bound").get<bool>();
  v.details = j.at("details").get<std::string>();
  return v;
}

inline nlohmann::json to_json(const AnnulusReport& r) {
  nlohmann::json j;
  j["n"] = r.n;
  j["mu"] = r.mu;
  j["alpha"] = r.alpha;
  j["beta"] = r.beta;
  j["gamma"] = r.gamma;
  j["sigma"] = r.sigma;
  j["per"] = r.per;
  j["u_star"] = r.u_star;
  j["tau"] = r.tau;
  j["u1"] = r.u1;
  j["boundary_radius"] = r.boundary_radius;
  j["H_rescaled"] = r.H_rescaled;
  if (r.necksize_unscaled) j["necksize_unscaled"] = *r.necksize_unscaled;
  j["u_extent_factor"] = r.u_extent_factor;
  j["closure_residual"] = detail::json_number(r.closure_residual);
  j["verdicts"] = nlohmann::json::array();
  for (const Verdict& v : r.verdicts) j["verdicts"].push_back(to_json(v));
  j["grid"] = {{"u_samples", r.grid.u_samples}, {"v_samples", r.grid.v_samples}};
  j["tool_version"] = r.tool_version;
  return j;
}

inline AnnulusReport report_from_json(const nlohmann::json& j) {
  AnnulusReport r;
  try {
    r.n = j.at("n").get<int>();
    r.mu = j.at("mu").get<double>();
    r.alpha = j.at("alpha").get<double>();
    r.beta = j.at("beta").get<double>();
    r.gamma = j.at("gamma").get<double>();
    r.sigma = j.at("sigma").get<double>();
    r.per = j.at("per").get<double>();
    r.u_star = j.at("u_star").get<double>();
    r.tau = j.at("tau").get<double>();
    r.u1 = j.at("u1").get<double>();
    r.boundary_radius = j.at("boundary_radius").get<double>();
    r.H_rescaled = j.at("H_rescaled").get<double>();
    if (j.contains("necksize_unscaled")) r.necksize_unscaled = j.at("necksize_unscaled").get<double>();
    r.u_extent_factor = j.at("u_extent_factor").get<double>();
    r.closure_residual = detail::json_double(j, "closure_residual");
    for (const auto& v : j.at("verdicts")) r.verdicts.push_back(verdict_from_json(v));
    r.grid.u_samples = j.at("grid").at("u_samples").get<std::size_t>();
    r.grid.v_samples = j.at("grid").at("v_samples").get<std::size_t>();
    r.tool_version = j.at("tool_version").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed report: ") + e.what());
  }
  return r;
}

// std::map-backed json sorts keys, so the dump is canonical.
inline std::string dump_report(const AnnulusReport& r) { return to_json(r).dump(2) + "\n"; }

inline void write_report(const AnnulusReport& r, const std::string& path) {
  detail::write_file(path, dump_report(r));
}

inline AnnulusReport read_report(const std::string& path) {
  const std::string text = detail::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
  return report_from_json(j);
}

struct FamilyReport {
  int n = 2;
  double beta1 = 0, beta_star = 0, gamma_star = 0;
  double u_star = 0, tau = 0, u1 = 0, sigma = 0, per = 0;
  std::string tool_version = kToolVersion;
};

inline FamilyReport make_family_report(int n, const BetaStar& bs, const FamilyPoint& fp) {
  return {n, bs.beta1, bs.beta, fp.param.gamma(), fp.u_star, fp.tau, fp.u1, fp.sigma, fp.per, kToolVersion};
}

inline std::string dump_family_report(const FamilyReport& f) {
  nlohmann::json j = {{"n", f.n},         {"beta1", f.beta1}, {"beta_star", f.beta_star},
                      {"gamma_star", f.gamma_star}, {"u_star", f.u_star}, {"tau", f.tau},
                      {"u1", f.u1},       {"sigma", f.sigma}, {"per", f.per},
                      {"tool_version", f.tool_version}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Meshes

// Shortest decimal that reads back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  if (r.ec != std::errc()) throw IoError("format_double failed");
  return {buf, r.ptr};
}

struct MeshData {
  std::vector<Vec3> vertices;
  std::vector<Vec3> normals;  // empty or one per vertex
  std::vector<Tri> faces;
};

enum class MeshFormat { obj, ply };

namespace detail {

inline void require_closed(const AnnulusModel& m, double closure_tol) {
  if (!(m.closure_residual <= closure_tol))
    throw MeshError("refusing to weld the v-seam: closure residual " + format_double(m.closure_residual) +
                    " exceeds " + format_double(closure_tol));
}

}  // namespace detail

inline std::string obj_text(const AnnulusModel& m, double closure_tol = 1e-6) {
  detail::require_closed(m, closure_tol);
  const TriMesh mesh = triangulate_grid(m.points, m.nu, m.nv);
  std::string s;
  s.reserve(m.points.size() * 110);
  s += "# ";
  s += kToolVersion;
  s += " n=" + std::to_string(m.fp.n) + " mu=" + format_double(m.fp.mu) + " grid=" + std::to_string(m.nu) + "x" +
       std::to_string(m.nv) + "\n";
  auto put3 = [&s](const char* tag, const Vec3& p) {
    s += tag;
    for (int k = 0; k < 3; ++k) {
      s += ' ';
      s += format_double(p[k]);
    }
    s += '\n';
  };
  for (const Vec3& p : m.points) put3("v", p);
  for (const Vec3& nrm : m.normals) put3("vn", nrm);
  for (const Tri& f : mesh.faces) {
    s += 'f';
    for (int k = 0; k < 3; ++k) {
      const std::string idx = std::to_string(f[k] + 1);
      s += ' ';
      s += idx;
      s += "//";
      s += idx;
    }
    s += '\n';
  }
  return s;
}

inline MeshData parse_obj(const std::string& text) {
  MeshData d;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw IoError("OBJ line " + std::to_string(lineno) + ": " + why);
  };
  auto read_doubles = [&](std::string_view rest) {
    Vec3 p;
    const char* c = rest.data();
    const char* end = rest.data() + rest.size();
    for (int k = 0; k < 3; ++k) {
      while (c < end && *c == ' ') ++c;
      const auto r = std::from_chars(c, end, p[k]);
      if (r.ec != std::errc()) fail("bad number");
      c = r.ptr;
    }
    return p;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const std::string_view sv(line);
    if (sv.starts_with("v ")) {
      d.vertices.push_back(read_doubles(sv.substr(2)));
    } else if (sv.starts_with("vn ")) {
      d.normals.push_back(read_doubles(sv.substr(3)));
    } else if (sv.starts_with("f ")) {
      std::istringstream fs(line.substr(2));
      std::string tok;
      std::vector<std::uint32_t> idx;
      while (fs >> tok) {
        std::uint32_t v = 0;
        const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (r.ec != std::errc() || v == 0) fail("bad face index");
        idx.push_back(v - 1);
      }
      if (idx.size() != 3) fail("only triangles are supported");
      d.faces.push_back({idx[0], idx[1], idx[2]});
    }
  }
  for (const Tri& f : d.faces)
    for (std::size_t v : f)
      if (v >= d.vertices.size()) throw IoError("OBJ face index out of range");
  if (!d.normals.empty() && d.normals.size() != d.vertices.size())
    throw IoError("OBJ normal count does not match vertex count");
  return d;
}

inline std::string ply_bytes(const AnnulusModel& m, double closure_tol = 1e-6) {
  detail::require_closed(m, closure_tol);
  const TriMesh mesh = triangulate_grid(m.points, m.nu, m.nv);
  std::string s = "ply\nformat binary_little_endian 1.0\ncomment " + std::string(kToolVersion) +
                  "\nelement vertex " + std::to_string(m.points.size()) +
                  "\nproperty double x\nproperty double y\nproperty double z\n"
                  "property double nx\nproperty double ny\nproperty double nz\n"
                  "element face " + std::to_string(mesh.faces.size()) +
                  "\nproperty list uchar uint vertex_indices\nend_header\n";
  auto put_le = [&s](auto value) {
    using U = std::conditional_t<sizeof(value) == 8, std::uint64_t, std::uint32_t>;
    const U bits = std::bit_cast<U>(value);
    for (std::size_t k = 0; k < sizeof(U); ++k) s += static_cast<char>((bits >> (8 * k)) & 0xff);
  };
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    for (int k = 0; k < 3; ++k) put_le(m.points[i][k]);
    for (int k = 0; k < 3; ++k) put_le(m.normals[i][k]);
  }
  for (const Tri& f : mesh.faces) {
    s += static_cast<char>(3);
    for (std::size_t v : f) put_le(static_cast<std::uint32_t>(v));
  }
  return s;
}

// Reads what ply_bytes writes, nothing more general.
inline MeshData parse_ply(const std::string& bytes) {
  const std::size_t hdr_end = bytes.find("end_header\n");
  if (bytes.rfind("ply\n", 0) != 0 || hdr_end == std::string::npos) throw IoError("not a PLY file");
  std::istringstream hdr(bytes.substr(0, hdr_end));
  std::string line;
  std::size_t nvert = 0, nface = 0;
  bool le = false;
  while (std::getline(hdr, line)) {
    if (line == "format binary_little_endian 1.0") le = true;
    if (line.rfind("element vertex ", 0) == 0) nvert = std::stoul(line.substr(15));
    if (line.rfind("element face ", 0) == 0) nface = std::stoul(line.substr(13));
  }
  if (!le) throw IoError("PLY: only binary_little_endian is supported");
  std::size_t pos = hdr_end + 11;
  if (bytes.size() != pos + nvert * 48 + nface * 13) throw IoError("PLY: unexpected payload size");
  auto get_le = [&](auto tag) {
    using U = std::conditional_t<sizeof(tag) == 8, std::uint64_t, std::uint32_t>;
    U bits = 0;
    for (std::size_t k = 0; k < sizeof(U); ++k)
      bits |= static_cast<U>(static_cast<unsigned char>(bytes[pos + k])) << (8 * k);
    pos += sizeof(U);
    return std::bit_cast<decltype(tag)>(bits);
  };
  MeshData d;
  d.vertices.resize(nvert);
  d.normals.resize(nvert);
  for (std::size_t i = 0; i < nvert; ++i) {
    for (int k = 0; k < 3; ++k) d.vertices[i][k] = get_le(0.0);
    for (int k = 0; k < 3; ++k) d.normals[i][k] = get_le(0.0);
  }
  d.faces.resize(nface);
  for (std::size_t f = 0; f < nface; ++f) {
    if (static_cast<unsigned char>(bytes[pos++]) != 3) throw IoError("PLY: non-triangle face");
    for (int k = 0; k < 3; ++k) {
      d.faces[f][k] = get_le(std::uint32_t{0});
      if (d.faces[f][k] >= nvert) throw IoError("PLY: face index out of range");
    }
  }
  return d;
}

inline void export_mesh(const AnnulusModel& m, MeshFormat fmt, const std::string& path, double closure_tol = 1e-6) {
  detail::write_file(path, fmt == MeshFormat::obj ? obj_text(m, closure_tol) : ply_bytes(m, closure_tol));
}

inline MeshData import_mesh(const std::string& path) {
  const std::string bytes = detail::read_file(path);
  return bytes.rfind("ply\n", 0) == 0 ? parse_ply(bytes) : parse_obj(bytes);
}

// Rebuilds a model from a report and its mesh. Vertex data comes from the mesh;
// the row spheres are recomputed from the stored parameters.
inline AnnulusModel model_from_artifacts(const AnnulusReport& r, const MeshData& mesh, const Tolerances& tol = {}) {
  const std::size_t nu = r.grid.u_samples, nv = r.grid.v_samples;
  if (mesh.vertices.size() != nu * nv) throw MeshError("mesh vertex count does not match the report grid");
  if (mesh.normals.size() != mesh.vertices.size()) throw MeshError("mesh carries no per-vertex normals");
  const TriMesh expect = triangulate_grid(mesh.vertices, nu, nv);
  if (expect.faces != mesh.faces) throw MeshError("mesh faces are not the welded grid triangulation");

  AnnulusModel m;
  m.fp.n = r.n;
  m.fp.mu = r.mu;
  m.fp.param = ParamPoint(r.alpha, r.beta, r.gamma);
  m.fp.u_star = r.u_star;
  m.fp.tau = r.tau;
  m.fp.u1 = r.u1;
  m.fp.sigma = r.sigma;
  m.fp.per = r.per;
  m.nu = nu;
  m.nv = nv;
  m.u_extent_factor = r.u_extent_factor;
  const double ext = r.u_extent_factor * r.u_star;
  m.u = uniform_grid(-ext, ext, nu);
  m.points = mesh.vertices;
  m.normals = mesh.normals;
  m.closure_residual = r.closure_residual;
  m.necksize_unscaled = r.necksize_unscaled;

  const FrameCurve seed = integrate_profile_frame(m.fp.param, std::max(ext, r.u1), tol);
  const SphereData top = sphere_data_at(seed, r.u_star);
  if (std::abs(top.radius - r.boundary_radius) > 1e-9 * r.boundary_radius)
    throw ConsistencyError("boundary sphere recomputed from the report parameters differs from the stored radius");
  m.center = top.center;
  m.boundary_radius = top.radius;
  m.mean_curvature_rescaled = r.H_rescaled;
  m.spheres = row_spheres(seed, m.u, m.center, top.radius);
  return m;
}

// Continues from mu = 0 to `mu` in equal steps no longer than max_step.
inline FamilyBranch continue_to(int n, double mu, double max_step = 0.05, const Tolerances& tol = {}) {
  if (!(mu >= 0) || !(max_step > 0)) throw DomainError("continue_to: need mu >= 0 and max_step > 0");
  const int steps = mu > 0 ? static_cast<int>(std::ceil(mu / max_step - 1e-12)) : 0;
  std::vector<double> mus{0.0};
  for (int k = 1; k <= steps; ++k) mus.push_back(k == steps ? mu : mu * k / steps);
  return continue_family(n, mus, tol);
}

// ---------------------------------------------------------------------------
// Sweeps along the family

struct SweepRow {
  FamilyPoint fp;
  double H = 0;
  std::vector<Verdict> verdicts;
  bool pass = false;
  double seconds = 0;  // assembly plus verification
};

struct SweepResult {
  std::vector<SweepRow> rows;   // every continued point, verified
  std::size_t verified_prefix = 0;
  bool truncated = false;       // continuation stopped early
  std::string notice;
};

// Continues the branch over mu_k = k mu_max / steps and verifies each point.
// Points are assembled and checked concurrently; results are kept in mu order.
inline SweepResult run_sweep(int n, double mu_max, int steps, const AssemblyOptions& aopt = {},
                             const VerifyOptions& vopt = {}, const Tolerances& tol = {}) {
  if (steps < 1 || !(mu_max > 0)) throw DomainError("run_sweep: need steps >= 1 and mu_max > 0");
  std::vector<double> mus(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) mus[static_cast<std::size_t>(k)] = k == steps ? mu_max : k * (mu_max / steps);
  const FamilyBranch branch = continue_family(n, mus, tol);

  SweepResult out;
  out.truncated = branch.truncated;
  out.notice = branch.notice;
  out.rows.resize(branch.points.size());
  auto work = [&](std::size_t k) {
    SweepRow row;
    row.fp = branch.points[k];
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const AnnulusModel m = assemble_annulus(row.fp, aopt, tol);
      row.H = m.mean_curvature_rescaled;
      row.verdicts = verify_all(m, vopt);
      row.pass = all_pass(row.verdicts);
    } catch (const std::exception& e) {
      row.verdicts.push_back(make_verdict("assembly", std::nan(""), 0.0, e.what()));
      row.pass = false;
    }
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
  };
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t start = 0; start < out.rows.size(); start += workers) {
    std::vector<std::future<SweepRow>> batch;
    for (std::size_t k = start; k < std::min(out.rows.size(), start + workers); ++k)
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, work, k));
    for (std::size_t b = 0; b < batch.size(); ++b) out.rows[start + b] = batch[b].get();
  }
  while (out.verified_prefix < out.rows.size() && out.rows[out.verified_prefix].pass) ++out.verified_prefix;
  return out;
}

inline std::string sweep_csv(const SweepResult& s) {
  std::vector<std::string> names;
  for (const auto& row : s.rows)
    for (const auto& v : row.verdicts)
      if (std::find(names.begin(), names.end(), v.name) == names.end()) names.push_back(v.name);
  std::string out = "mu,alpha,beta,gamma,H,u_star,tau,all_pass";
  for (const auto& nm : names) out += "," + nm;
  out += "\n";
  for (const auto& row : s.rows) {
    const ParamPoint& p = row.fp.param;
    for (double x : {row.fp.mu, p.alpha(), p.beta(), p.gamma(), row.H, row.fp.u_star, row.fp.tau})
      out += format_double(x) + ",";
    out += row.pass ? "1" : "0";
    for (const auto& nm : names) {
      auto it = std::find_if(row.verdicts.begin(), row.verdicts.end(), [&](const Verdict& v) { return v.name == nm; });
      out += it == row.verdicts.end() ? "," : (it->pass ? ",1" : ",0");
    }
    out += "\n";
  }
  return out;
}

inline void write_sweep_csv(const SweepResult& s, const std::string& path) { detail::write_file(path, sweep_csv(s)); }

}  // namespace cmcaf
