#include "cli/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pqd::cli {

using nlohmann::json;

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_file(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

[[noreturn]] void bad(const std::filesystem::path& path, const std::string& where, const std::string& what) {
  throw ValidationError(path.string() + ": at " + where + ": " + what);
}

double as_real(const json& j, const std::filesystem::path& path, const std::string& where) {
  if (!j.is_number()) bad(path, where, "expected a number");
  return j.get<double>();
}

CMatrix parse_matrix(const json& j, Eigen::Index dim, const std::filesystem::path& path,
                     const std::string& where) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
    bad(path, where, "expected an array of " + std::to_string(dim) + " rows");
  }
  CMatrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    const std::string rw = where + "/" + std::to_string(r);
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      bad(path, rw, "expected " + std::to_string(dim) + " entries");
    }
    for (Eigen::Index c = 0; c < dim; ++c) {
      const json& z = row[static_cast<std::size_t>(c)];
      const std::string zw = rw + "/" + std::to_string(c);
      if (!z.is_array() || z.size() != 2) bad(path, zw, "expected an [re, im] pair");
      m(r, c) = Complex(as_real(z[0], path, zw + "/0"), as_real(z[1], path, zw + "/1"));
    }
  }
  return m;
}

Eigen::Index read_dim(const json& j, const std::filesystem::path& path) {
  if (!j.is_object()) bad(path, "/", "expected a JSON object");
  if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long long>() < 1) {
    bad(path, "/dim", "expected a positive integer");
  }
  return static_cast<Eigen::Index>(j["dim"].get<long long>());
}

DensityMatrix as_density(CMatrix m, const std::filesystem::path& path, const std::string& where) {
  try {
    return DensityMatrix(std::move(m));
  } catch (const ValidationError& e) {
    bad(path, where, e.what());
  }
}

std::string json_real(double x) { return std::isfinite(x) ? format_real(x) : "null"; }

template <class Range, class Fn>
void json_array(std::ostream& os, const Range& range, Fn&& emit) {
  os << "[";
  bool first = true;
  for (const auto& item : range) {
    if (!first) os << ", ";
    first = false;
    emit(item);
  }
  os << "]";
}

struct Interval {
  double begin;
  double end;
};

std::vector<Interval> intervals(const DecompositionSeries& dec, bool TimeFlags::*member) {
  std::vector<Interval> out;
  for (std::size_t k = 0; k < dec.size(); ++k) {
    if (!(dec.flags[k].*member)) continue;
    if (!out.empty() && k > 0 && (dec.flags[k - 1].*member)) {
      out.back().end = dec.times[k];
    } else {
      out.push_back({dec.times[k], dec.times[k]});
    }
  }
  return out;
}

}  // namespace

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string matrix_json(const CMatrix& m) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    os << (r ? ", [" : "[");
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      os << (c ? ", [" : "[") << format_real(m(r, c).real()) << ", " << format_real(m(r, c).imag()) << "]";
    }
    os << "]";
  }
  os << "]";
  return os.str();
}

DensityMatrix read_matrix_file(const std::filesystem::path& path) {
  const json j = parse_file(path);
  const Eigen::Index dim = read_dim(j, path);
  if (!j.contains("matrix")) bad(path, "/matrix", "missing");
  return as_density(parse_matrix(j["matrix"], dim, path, "/matrix"), path, "/matrix");
}

void write_matrix_file(const std::filesystem::path& path, const CMatrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot write " + path.string());
  os << "{\"dim\": " << m.rows() << ", \"matrix\": " << matrix_json(m) << "}\n";
}

std::vector<TrajectorySample> read_trajectory_file(const std::filesystem::path& path) {
  const json j = parse_file(path);
  const Eigen::Index dim = read_dim(j, path);
  if (!j.contains("times") || !j["times"].is_array()) bad(path, "/times", "expected an array");
  if (!j.contains("rho") || !j["rho"].is_array()) bad(path, "/rho", "expected an array");
  const json& times = j["times"];
  const json& rho = j["rho"];
  if (times.size() != rho.size()) bad(path, "/rho", "length differs from /times");
  if (times.empty()) bad(path, "/times", "trajectory is empty");
  std::vector<TrajectorySample> out;
  out.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const std::string where = "/rho/" + std::to_string(k);
    const double t = as_real(times[k], path, "/times/" + std::to_string(k));
    out.push_back({t, as_density(parse_matrix(rho[k], dim, path, where), path, where)});
  }
  return out;
}

void write_trajectory_file(const std::filesystem::path& path, std::span<const TrajectorySample> samples) {
  if (samples.empty()) throw ValidationError("refusing to write an empty trajectory");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot write " + path.string());
  os << "{\"dim\": " << samples.front().rho.dim() << ",\n \"times\": ";
  json_array(os, samples, [&](const TrajectorySample& s) { os << format_real(s.time); });
  os << ",\n \"rho\": [";
  for (std::size_t k = 0; k < samples.size(); ++k) {
    os << (k ? ",\n  " : "\n  ") << matrix_json(samples[k].rho.matrix());
  }
  os << "]}\n";
}

LindbladModelFile read_lindblad_file(const std::filesystem::path& path) {
  const json j = parse_file(path);
  const Eigen::Index dim = read_dim(j, path);
  if (!j.contains("hamiltonian")) bad(path, "/hamiltonian", "missing");
  LindbladSpec spec;
  spec.hamiltonian = parse_matrix(j["hamiltonian"], dim, path, "/hamiltonian");
  if (j.contains("jump_ops")) {
    const json& ops = j["jump_ops"];
    if (!ops.is_array()) bad(path, "/jump_ops", "expected an array");
    for (std::size_t k = 0; k < ops.size(); ++k) {
      const std::string where = "/jump_ops/" + std::to_string(k);
      if (!ops[k].is_object() || !ops[k].contains("operator") || !ops[k].contains("rate")) {
        bad(path, where, "expected {\"operator\": matrix, \"rate\": number}");
      }
      spec.jumps.push_back({parse_matrix(ops[k]["operator"], dim, path, where + "/operator"),
                            as_real(ops[k]["rate"], path, where + "/rate")});
    }
  }
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    bad(path, "/", e.what());
  }
  if (!j.contains("rho0")) bad(path, "/rho0", "missing");
  return {std::move(spec), as_density(parse_matrix(j["rho0"], dim, path, "/rho0"), path, "/rho0")};
}

void write_rate_report(std::ostream& os, const DecompositionSeries& dec) {
  const Eigen::Index d = dec.dim();
  os << "time";
  for (Eigen::Index i = 0; i < d; ++i) os << ",q_" << i;
  os << ",negative_flag,singular_flag,condition_estimate\n";
  for (std::size_t k = 0; k < dec.size(); ++k) {
    os << format_real(dec.times[k]);
    for (Eigen::Index i = 0; i < d; ++i) os << ',' << format_real(dec.rates[k](i));
    os << ',' << (dec.flags[k].negative_rate ? 1 : 0) << ',' << (dec.flags[k].singular ? 1 : 0) << ','
       << format_real(dec.condition_estimates[k]) << '\n';
  }
}

void write_hamiltonians(std::ostream& os, const DecompositionSeries& dec) {
  os << "{\"dim\": " << dec.dim() << ",\n \"times\": ";
  json_array(os, dec.times, [&](double t) { os << format_real(t); });
  os << ",\n \"hamiltonians\": [";
  for (std::size_t k = 0; k < dec.size(); ++k) os << (k ? ",\n  " : "\n  ") << matrix_json(dec.hamiltonians[k]);
  os << "]}\n";
}

void write_flags(std::ostream& os, const DecompositionSeries& dec) {
  auto times_where = [&](bool TimeFlags::*member) {
    std::vector<double> t;
    for (std::size_t k = 0; k < dec.size(); ++k) {
      if (dec.flags[k].*member) t.push_back(dec.times[k]);
    }
    return t;
  };
  auto emit_intervals = [&](bool TimeFlags::*member) {
    json_array(os, intervals(dec, member),
               [&](const Interval& iv) { os << "[" << format_real(iv.begin) << ", " << format_real(iv.end) << "]"; });
  };
  os << "{\"dim\": " << dec.dim() << ",\n \"negative_intervals\": ";
  emit_intervals(&TimeFlags::negative_rate);
  os << ",\n \"singular_intervals\": ";
  emit_intervals(&TimeFlags::singular);
  os << ",\n \"negative_times\": ";
  json_array(os, times_where(&TimeFlags::negative_rate), [&](double t) { os << format_real(t); });
  os << ",\n \"singular_times\": ";
  json_array(os, times_where(&TimeFlags::singular), [&](double t) { os << format_real(t); });
  os << "}\n";
}

void write_ensemble(std::ostream& os, const EnsembleResult& result) {
  const Eigen::Index d = result.mean_rho.empty() ? 0 : result.mean_rho.front().rows();
  os << "time";
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) os << ",rho_" << r << '_' << c << "_re,rho_" << r << '_' << c << "_im";
  }
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) os << ",stderr_" << r << '_' << c;
  }
  os << ",trace_distance\n";
  for (std::size_t k = 0; k < result.times.size(); ++k) {
    os << format_real(result.times[k]);
    const CMatrix& m = result.mean_rho[k];
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) os << ',' << format_real(m(r, c).real()) << ',' << format_real(m(r, c).imag());
    }
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) os << ',' << format_real(result.std_error[k](r, c));
    }
    os << ',' << format_real(result.trace_distance_to_exact[k]) << '\n';
  }
}

void write_channel(std::ostream& os, const ChannelDecomposition& dec, const KrausLikeForm* kraus) {
  os << "{\"dim\": " << dec.probabilities.size() << ",\n \"classification\": \""
     << to_string(dec.classification) << "\",\n \"pairing\": \"" << dec.pairing << "\",\n \"q\": ";
  json_array(os, std::vector<double>(dec.probabilities.data(), dec.probabilities.data() + dec.probabilities.size()),
             [&](double q) { os << json_real(q); });
  os << ",\n \"reconstruction_residual\": " << json_real(dec.reconstruction_residual)
     << ",\n \"condition_estimate\": " << json_real(dec.condition_estimate);
  if (dec.block_structure) os << ",\n \"block_structure\": \"" << dec.block_structure->describe() << "\"";
  os << ",\n \"connecting_unitary\": " << matrix_json(dec.connecting_unitary) << ",\n \"unitaries\": [";
  for (std::size_t i = 0; i < dec.unitaries.size(); ++i) os << (i ? ",\n  " : "\n  ") << matrix_json(dec.unitaries[i]);
  os << "]";
  if (kraus) {
    os << ",\n \"kraus_like\": [";
    for (std::size_t i = 0; i < kraus->terms.size(); ++i) {
      const auto& t = kraus->terms[i];
      os << (i ? ",\n  " : "\n  ") << "{\"index\": " << t.index << ", \"sign\": " << t.sign
         << ", \"K\": " << matrix_json(t.k) << ", \"K_bar\": " << matrix_json(t.k_bar) << "}";
    }
    os << "],\n \"completeness_residual\": " << json_real(kraus->completeness_residual());
  }
  os << "}\n";
}

}  // namespace pqd::cli
