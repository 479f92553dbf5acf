#include "postsel/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace postsel::io {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

const json& field(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path.empty() ? "/" : path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "/" + key, "missing field");
  return *it;
}

std::size_t size_field(const json& j, const std::string& key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw SchemaError(path + "/" + key, "expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

// rows x cols nested array of numbers, flattened row-major.
std::vector<double> number_rows(const json& j, const std::string& key, const std::string& path,
                                std::size_t rows, std::size_t cols) {
  const json& v = field(j, key, path);
  const std::string base = path + "/" + key;
  if (!v.is_array() || v.size() != rows) {
    throw SchemaError(base, "expected an array of " + std::to_string(rows) + " rows");
  }
  std::vector<double> out;
  out.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = v[r];
    const std::string rp = base + "/" + std::to_string(r);
    if (!row.is_array() || row.size() != cols) {
      throw SchemaError(rp, "expected an array of " + std::to_string(cols) + " numbers");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw SchemaError(rp + "/" + std::to_string(c), "expected a number");
      out.push_back(row[c].get<double>());
    }
  }
  return out;
}

}  // namespace

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json to_json(const Operator& op) {
  json j;
  j["rows"] = op.rows();
  j["cols"] = op.cols();
  j["dims"] = op.dims();
  json re = json::array(), im = json::array();
  for (std::size_t r = 0; r < op.rows(); ++r) {
    json rr = json::array(), ir = json::array();
    for (std::size_t c = 0; c < op.cols(); ++c) {
      rr.push_back(op(r, c).real());
      ir.push_back(op(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ir));
  }
  j["re"] = std::move(re);
  j["im"] = std::move(im);
  return j;
}

Operator operator_from_json(const json& j, const std::string& path) {
  const std::size_t rows = size_field(j, "rows", path);
  const std::size_t cols = size_field(j, "cols", path);
  Dims dims;
  if (j.contains("dims")) {
    const json& d = j["dims"];
    if (!d.is_array()) throw SchemaError(path + "/dims", "expected an array");
    for (std::size_t k = 0; k < d.size(); ++k) {
      if (!d[k].is_number_unsigned()) {
        throw SchemaError(path + "/dims/" + std::to_string(k), "expected a positive integer");
      }
      dims.push_back(d[k].get<std::size_t>());
    }
  } else {
    dims = {rows};
  }
  const auto re = number_rows(j, "re", path, rows, cols);
  const auto im = number_rows(j, "im", path, rows, cols);
  Matrix m(idx(rows), idx(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) m(idx(r), idx(c)) = cplx(re[r * cols + c], im[r * cols + c]);
  }
  try {
    return Operator(std::move(m), std::move(dims));
  } catch (const DimensionError& e) {
    throw SchemaError(path + "/dims", e.what());
  }
}

json to_json(const Channel& c) {
  json j;
  j["kind"] = "channel";
  j["din"] = c.din;
  j["dout"] = c.dout;
  j["choi"] = to_json(c.choi);
  return j;
}

json to_json(const HPMap& m) {
  json j;
  j["kind"] = "hp";
  j["din"] = m.din;
  j["dout"] = m.dout;
  j["choi"] = to_json(m.choi);
  return j;
}

HPMap map_from_json(const json& j, const std::string& path) {
  const std::size_t din = size_field(j, "din", path);
  const std::size_t dout = size_field(j, "dout", path);
  std::string kind = "hp";
  if (j.contains("kind")) {
    if (!j["kind"].is_string()) throw SchemaError(path + "/kind", "expected a string");
    kind = j["kind"].get<std::string>();
  }
  if (kind != "hp" && kind != "channel") {
    throw SchemaError(path + "/kind", "expected \"hp\" or \"channel\"");
  }
  Operator choi = operator_from_json(field(j, "choi", path), path + "/choi");
  if (static_cast<std::size_t>(choi.rows()) != din * dout || !choi.is_square()) {
    throw SchemaError(path + "/choi", "shape does not match din * dout");
  }
  if (!choi.is_hermitian()) throw SchemaError(path + "/choi", "Choi matrix is not Hermitian");
  if (kind == "channel") {
    try {
      return Channel::from_choi(din, dout, choi.matrix()).as_hp();
    } catch (const NumericalError& e) {
      throw SchemaError(path + "/choi", e.what());
    }
  }
  return make_map<HPMap>(din, dout, choi.matrix());
}

json to_json(const DiamondResult& r, bool with_witness) {
  json j;
  j["value"] = number(r.value);
  j["lower"] = number(r.lower);
  j["upper"] = number(r.upper);
  j["gap"] = number(r.gap);
  j["restarts"] = r.restarts;
  j["iterations"] = r.sdp_iterations;
  j["seesaw_iterations"] = r.seesaw_iterations;
  j["converged"] = r.converged;
  j["certificate_min_eigenvalue"] = number(r.certificate_min_eigenvalue);
  j["status"] = r.status;
  if (with_witness && r.witness.rows() > 0) j["witness"] = to_json(r.witness);
  return j;
}

json to_json(const PostSelectionReport& r) {
  json j;
  j["n"] = r.n;
  j["d"] = r.d;
  j["g"] = r.g;
  j["lhs"] = to_json(r.lhs);
  j["rhs"] = number(r.rhs);
  j["slack"] = number(r.slack);
  j["holds"] = r.holds;
  j["tau_trace_norm"] = number(r.tau_trace_norm);
  return j;
}

json tau_to_json(const TauFamily& tau, bool full) {
  json j;
  j["n"] = tau.n;
  j["d"] = tau.d;
  j["g"] = tau.g;
  const EigenDecomposition ed = eigh(tau.tau_reduced);
  json ev = json::array();
  for (Eigen::Index k = ed.values.size(); k-- > 0;) ev.push_back(ed.values(k));
  j["eigs"] = std::move(ev);
  j["tau_reduced"] = to_json(tau.tau_reduced);
  if (full) {
    j["tau_full"] = to_json(tau.tau_full);
    j["purification"] = to_json(tau.purification_ket);
  }
  return j;
}

json to_json(const SecurityParams& p) {
  json j;
  j["n"] = p.n;
  j["d"] = p.d;
  j["eps"] = number(p.eps);
  j["eps_bar"] = number(p.eps_bar);
  j["log2_eps"] = number(p.log2_eps);
  j["log2_eps_bar"] = number(p.log2_eps_bar);
  j["vacuous"] = p.vacuous;
  j["key_penalty_bits"] = number(p.key_penalty_bits);
  return j;
}

json to_json(const ToyReport& r) {
  json j;
  j["n"] = r.n;
  j["d"] = r.d;
  j["mode"] = to_string(r.mode);
  j["collective"] = number(r.collective);
  j["collective_lower"] = number(r.collective_lower);
  j["collective_certified"] = r.collective_certified;
  j["mixture_value"] = number(r.mixture_value);
  j["mixture_le_max"] = r.mixture_le_max;
  if (r.mode == ToyMode::kPostselection) {
    j["g"] = r.g;
    j["tau_value"] = number(r.tau_value);
    j["rhs"] = number(r.rhs);
    j["implied_eps"] = number(r.implied_eps);
    j["implied_log2_eps"] = number(r.implied_log2_eps);
  }
  j["insecure"] = r.insecure;
  return j;
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("/", std::string("malformed JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp + "'");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename '" + tmp + "' to '" + path + "'");
  }
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) line += ',';
    line += fields[k];
  }
  line += '\n';
  return line;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace postsel::io
