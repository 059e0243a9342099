#include "ssal/io.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ssal/errors.hpp"
#include "ssal/log.hpp"

namespace ssal::io {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;
  auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end && std::isfinite(out);
}

bool parse_int(const std::string& text, long long& out) {
  if (text.empty()) return false;
  auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size();
}

struct SliceBuilder {
  int donor_id = 0;
  int slice_id = 0;
  std::vector<std::string> spot_ids;
  std::set<std::string> seen;
  std::vector<Position> positions;
  std::vector<int> y;
  std::vector<std::vector<double>> x;
};

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Eigen::VectorXd vec_from(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a.at(i).get<double>();
  return v;
}

json mat_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vec_json(m.row(r).transpose()));
  return a;
}

Eigen::MatrixXd mat_from(const json& a) {
  if (a.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(a.at(0).size()));
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (a.at(r).size() != static_cast<std::size_t>(m.cols())) throw InputError("ragged matrix in model artifact");
    m.row(static_cast<Eigen::Index>(r)) = vec_from(a.at(r)).transpose();
  }
  return m;
}

std::string structure_name(CorrelationStructure s) {
  return s == CorrelationStructure::kExchangeable ? "exchangeable" : "autoregressive";
}

CorrelationStructure structure_from(const std::string& s) {
  if (s == "exchangeable") return CorrelationStructure::kExchangeable;
  if (s == "autoregressive" || s == "ar1") return CorrelationStructure::kAutoregressive;
  throw ConfigError("structure: expected 'exchangeable' or 'autoregressive', got '" + s + "'");
}

bool integral_grid(const StudyData& study) {
  for (const auto& s : study.slices) {
    for (const auto& p : s.grid.positions) {
      if (p[0] != std::floor(p[0]) || p[1] != std::floor(p[1])) return false;
    }
  }
  return true;
}

}  // namespace

std::string read_text(const std::string& path) {
  if (ends_with(path, ".gz")) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (f == nullptr) throw IoError("cannot open " + path);
    std::string out;
    char buf[1 << 16];
    int n = 0;
    while ((n = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(n));
    const bool failed = n < 0;
    gzclose(f);
    if (failed) throw IoError("cannot decompress " + path);
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path() && !fs::exists(target.parent_path())) {
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create directory for " + path + ": " + ec.message());
  }
  const std::string partial = path + ".partial";
  bool ok = false;
  if (ends_with(path, ".gz")) {
    gzFile f = gzopen(partial.c_str(), "wb6");
    if (f != nullptr) {
      ok = content.empty() ||
           gzwrite(f, content.data(), static_cast<unsigned>(content.size())) == static_cast<int>(content.size());
      ok = gzclose(f) == Z_OK && ok;
    }
  } else {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (out) {
      out.write(content.data(), static_cast<std::streamsize>(content.size()));
      out.close();
      ok = static_cast<bool>(out);
    }
  }
  if (!ok) throw IoError("cannot write " + path);
  fs::rename(partial, target, ec);
  if (ec) throw IoError("cannot move " + partial + " to " + path + ": " + ec.message());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') {
      if (end == text.size()) break;
      continue;
    }
    auto fields = split_csv_line(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
    } else {
      if (fields.size() != table.header.size()) {
        throw InputError(source + ":" + std::to_string(line_no) + ": expected " +
                         std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
      }
      table.rows.push_back(std::move(fields));
      table.line_numbers.push_back(line_no);
    }
    if (end == text.size()) break;
  }
  if (table.header.empty()) throw InputError(source + ": no header row");
  return table;
}

StudyData read_dataset(const std::vector<std::string>& paths, const ReadOptions& options) {
  if (paths.empty()) throw InputError("no dataset files given");
  std::map<std::pair<int, int>, SliceBuilder> builders;
  std::vector<std::string> covariates;
  std::string covariate_source;

  for (const auto& path : paths) {
    const CsvTable table = parse_csv(read_text(path), path);
    std::map<std::string, std::size_t> col;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (!col.emplace(table.header[j], j).second) {
        throw InputError(path + ": duplicate column '" + table.header[j] + "'");
      }
    }
    auto need = [&](const std::string& name) {
      auto it = col.find(name);
      if (it == col.end()) throw InputError(path + ": missing required column '" + name + "'");
      return it->second;
    };
    const std::size_t c_spot = need("spot_id");
    const std::size_t c_donor = need("donor_id");
    const std::size_t c_slice = need("slice_id");
    const std::size_t c_y = need("y");
    std::size_t c_a = 0, c_b = 0;
    if (col.count("row") && col.count("col")) {
      c_a = col["row"];
      c_b = col["col"];
    } else if (col.count("x_coord") && col.count("y_coord")) {
      c_a = col["x_coord"];
      c_b = col["y_coord"];
    } else {
      throw InputError(path + ": coordinates need columns row and col, or x_coord and y_coord");
    }
    const std::set<std::size_t> reserved = {c_spot, c_donor, c_slice, c_y, c_a, c_b};
    std::vector<std::size_t> cov_cols;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
      if (reserved.count(j) == 0 && table.header[j] != "row" && table.header[j] != "col" &&
          table.header[j] != "x_coord" && table.header[j] != "y_coord") {
        cov_cols.push_back(j);
        names.push_back(table.header[j]);
      }
    }
    if (covariate_source.empty()) {
      covariates = names;
      covariate_source = path;
    } else if (names != covariates) {
      throw InputError(path + ": covariate columns differ from those in " + covariate_source);
    }

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      const std::string where = path + ":" + std::to_string(table.line_numbers[r]);
      long long donor = 0, slice = 0;
      if (!parse_int(row[c_donor], donor)) throw InputError(where + ": donor_id '" + row[c_donor] + "' is not an integer");
      if (!parse_int(row[c_slice], slice)) throw InputError(where + ": slice_id '" + row[c_slice] + "' is not an integer");
      auto& b = builders[{static_cast<int>(donor), static_cast<int>(slice)}];
      b.donor_id = static_cast<int>(donor);
      b.slice_id = static_cast<int>(slice);
      const std::string& spot = row[c_spot];
      if (spot.empty()) throw InputError(where + ": empty spot_id");
      if (!b.seen.insert(spot).second) {
        throw InputError(where + ": duplicated spot_id '" + spot + "' in donor " + std::to_string(donor) + " slice " +
                         std::to_string(slice));
      }
      Position p{};
      if (!parse_double(row[c_a], p[0])) throw InputError(where + ": coordinate '" + row[c_a] + "' is not numeric");
      if (!parse_double(row[c_b], p[1])) throw InputError(where + ": coordinate '" + row[c_b] + "' is not numeric");
      int y = -1;
      if (row[c_y] == "0") {
        y = 0;
      } else if (row[c_y] == "1") {
        y = 1;
      } else if (row[c_y] != "NA") {
        throw InputError(where + ": y must be 0, 1 or NA, got '" + row[c_y] + "'");
      }
      std::vector<double> xs(cov_cols.size());
      for (std::size_t k = 0; k < cov_cols.size(); ++k) {
        if (!parse_double(row[cov_cols[k]], xs[k])) {
          throw InputError(where + ": covariate " + names[k] + " value '" + row[cov_cols[k]] + "' is not a finite number");
        }
      }
      b.spot_ids.push_back(spot);
      b.positions.push_back(p);
      b.y.push_back(y);
      b.x.push_back(std::move(xs));
    }
  }

  std::vector<std::size_t> keep;
  if (options.min_total_count) {
    std::vector<double> totals(covariates.size(), 0.0);
    for (const auto& [key, b] : builders) {
      for (const auto& xs : b.x) {
        for (std::size_t k = 0; k < xs.size(); ++k) totals[k] += xs[k];
      }
    }
    for (std::size_t k = 0; k < covariates.size(); ++k) {
      if (totals[k] >= *options.min_total_count) keep.push_back(k);
    }
    if (keep.size() < covariates.size()) {
      warn("dropped " + std::to_string(covariates.size() - keep.size()) + " covariates with total count below " +
           fmt(*options.min_total_count));
    }
    if (keep.empty()) throw InputError("no covariate reaches the minimum total count " + fmt(*options.min_total_count));
  } else {
    for (std::size_t k = 0; k < covariates.size(); ++k) keep.push_back(k);
  }

  StudyData study;
  study.structure = options.structure;
  for (std::size_t k : keep) study.covariate_names.push_back(covariates[k]);
  std::map<int, std::size_t> donor_index;
  std::map<int, std::size_t> per_donor;
  for (const auto& [key, b] : builders) {
    donor_index.emplace(key.first, donor_index.size());
    ++per_donor[key.first];
  }
  std::size_t max_g = 0, min_g = SIZE_MAX;
  for (const auto& [donor, count] : per_donor) {
    max_g = std::max(max_g, count);
    min_g = std::min(min_g, count);
  }
  if (min_g != max_g) {
    if (options.multislice && !options.allow_unequal) {
      std::string counts;
      for (const auto& [donor, count] : per_donor) {
        counts += (counts.empty() ? "" : ", ") + ("donor " + std::to_string(donor) + ": " + std::to_string(count));
      }
      throw InputError("the multi-slice model requires every donor to have the same number of slices (" + counts +
                       "); pass --allow-unequal to pad the correlation model");
    }
    study.padded = true;
  }
  study.donors = donor_index.size();
  study.slices_per_donor = max_g;

  std::map<int, std::size_t> next_position;
  for (auto& [key, b] : builders) {
    SliceData s;
    const std::size_t n = b.y.size();
    s.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < keep.size(); ++k) {
        double v = b.x[i][keep[k]];
        if (options.counts) {
          if (v < 0.0) {
            throw InputError("negative count " + fmt(v) + " for covariate " + covariates[keep[k]] + " at spot " +
                             b.spot_ids[i]);
          }
          v = std::log1p(v);
        }
        s.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
      }
    }
    s.y = b.y;
    s.r.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.r[i] = b.y[i] < 0 ? 0 : 1;
    s.grid.positions = b.positions;
    s.graph = std::make_shared<const NeighborGraph>(build_neighbor_graph(s.grid, options.delta));
    s.donor_id = b.donor_id;
    s.slice_id = b.slice_id;
    s.donor = donor_index.at(b.donor_id);
    s.position = next_position[b.donor_id]++;
    s.spot_ids = std::move(b.spot_ids);
    study.slices.push_back(std::move(s));
  }
  study.validate();
  return study;
}

std::string dataset_csv(const StudyData& study) {
  const bool lattice = integral_grid(study);
  std::ostringstream out;
  out << "spot_id," << (lattice ? "row,col" : "x_coord,y_coord") << ",donor_id,slice_id,y";
  for (std::size_t k = 0; k < study.d(); ++k) {
    out << ',' << quote(k < study.covariate_names.size() ? study.covariate_names[k] : "x" + std::to_string(k + 1));
  }
  out << '\n';
  for (const auto& s : study.slices) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& p = s.grid.positions[i];
      out << quote(s.spot_id(i)) << ',' << fmt(p[0]) << ',' << fmt(p[1]) << ',' << s.donor_id << ',' << s.slice_id
          << ',' << (s.observed(i) ? std::to_string(s.y[i]) : "NA");
      for (Eigen::Index k = 0; k < s.x.cols(); ++k) out << ',' << fmt(s.x(static_cast<Eigen::Index>(i), k));
      out << '\n';
    }
  }
  return out.str();
}

json params_json(const ModelParams& p) {
  json j;
  j["eta"] = p.eta;
  j["beta"] = vec_json(p.beta);
  j["tau2"] = vec_json(p.tau2);
  j["w"] = p.w;
  j["U"] = mat_json(p.U);
  j["sigma2"] = vec_json(p.sigma2);
  j["rho"] = p.rho;
  j["gamma"] = vec_json(p.gamma);
  return j;
}

ModelParams params_from_json(const json& j) {
  ModelParams p;
  p.eta = j.at("eta").get<double>();
  p.beta = vec_from(j.at("beta"));
  p.tau2 = vec_from(j.at("tau2"));
  p.w = j.at("w").get<double>();
  p.U = mat_from(j.at("U"));
  p.sigma2 = vec_from(j.at("sigma2"));
  p.rho = j.at("rho").get<double>();
  const Eigen::VectorXd g = vec_from(j.at("gamma"));
  if (g.size() != 3) throw InputError("gamma must have three entries");
  p.gamma = g;
  return p;
}

json truth_json(const SimulatedStudy& sim) {
  const SimConfig& c = sim.config;
  json j;
  json cfg;
  cfg["m"] = c.m;
  cfg["d"] = c.d;
  cfg["beta_true"] = vec_json(c.beta_true);
  cfg["eta_true"] = c.eta_true;
  cfg["gibbs_sweeps"] = c.gibbs_sweeps;
  cfg["seed"] = c.seed;
  cfg["delta"] = c.delta;
  json miss;
  miss["kind"] = c.missingness.kind == MissingnessKind::kNone   ? "none"
                 : c.missingness.kind == MissingnessKind::kMcar ? "mcar"
                                                                : "nonignorable";
  miss["mcar_count"] = c.missingness.mcar_count;
  miss["gamma"] = vec_json(c.missingness.gamma);
  miss["sweeps"] = c.missingness.sweeps;
  cfg["missingness"] = miss;
  if (c.multislice) {
    json ms;
    ms["donors"] = c.multislice->donors;
    ms["slices_per_donor"] = c.multislice->slices_per_donor;
    ms["sigma2"] = c.multislice->sigma2;
    ms["rho"] = c.multislice->rho;
    ms["structure"] = structure_name(c.multislice->structure);
    cfg["multislice"] = ms;
  }
  j["config"] = cfg;
  j["truth"] = params_json(sim.truth);
  json slices = json::array();
  for (std::size_t s = 0; s < sim.study.slices.size(); ++s) {
    const auto& sl = sim.study.slices[s];
    json e;
    e["donor_id"] = sl.donor_id;
    e["slice_id"] = sl.slice_id;
    e["missing"] = sl.missing_count();
    e["complete_y"] = sim.complete[s];
    slices.push_back(e);
  }
  j["slices"] = slices;
  return j;
}

std::string summary_csv(const PosteriorSummary& summary, const std::vector<std::string>& names, double threshold) {
  (void)names;
  std::map<std::string, const CovariateSummary*> by_name;
  for (const auto& c : summary.covariates) by_name["beta[" + c.name + "]"] = &c;
  std::ostringstream out;
  out << "parameter,mean,sd,ci_low,ci_high,ratio,selected\n";
  for (const auto& p : summary.parameters) {
    out << quote(p.name) << ',' << fmt(p.mean) << ',' << fmt(p.sd) << ',' << fmt(p.ci_low) << ',' << fmt(p.ci_high);
    auto it = by_name.find(p.name);
    if (it != by_name.end()) {
      const double r = it->second->ratio;
      out << ',' << fmt(r) << ',' << (std::abs(r) >= threshold ? 1 : 0);
    } else {
      out << ",,";
    }
    out << '\n';
  }
  return out.str();
}

std::string report_csv(const SimulationReport& report) {
  std::ostringstream out;
  out << "parameter,avgBias,avgSEE,avgSEM,avgCR\n";
  for (const auto& r : report.rows) {
    out << quote(r.parameter) << ',' << fmt(r.avg_bias) << ',' << (r.avg_see ? fmt(*r.avg_see) : "NA") << ','
        << fmt(r.avg_sem) << ',' << fmt(r.avg_cr) << '\n';
  }
  out << "# replicates: " << report.replicates << ", successful: " << report.successes << '\n';
  for (const auto& res : report.results) {
    if (!res.ok) out << "# replicate " << res.replicate << " failed: " << res.error << '\n';
  }
  if (!report.see_note.empty()) out << "# avgSEE is NA: " << report.see_note << '\n';
  return out.str();
}

std::string prediction_csv(const SliceData& slice, const Prediction& prediction, bool probabilistic) {
  std::ostringstream out;
  out << "spot_id,x_coord,y_coord,mu_hat" << (probabilistic ? "" : ",label") << '\n';
  for (std::size_t i = 0; i < slice.size(); ++i) {
    const auto& p = slice.grid.positions[i];
    out << quote(slice.spot_id(i)) << ',' << fmt(p[0]) << ',' << fmt(p[1]) << ','
        << fmt(prediction.mu_hat(static_cast<Eigen::Index>(i)));
    if (!probabilistic) out << ',' << prediction.labels[i];
    out << '\n';
  }
  return out.str();
}

std::string lattice_table_csv(const StudyData& study, const std::vector<std::vector<double>>& values) {
  if (values.size() != study.slices.size()) throw InputError("lattice values do not match the study's slices");
  std::ostringstream out;
  out << "donor_id,slice_id,spot_id,x_coord,y_coord,value\n";
  for (std::size_t s = 0; s < study.slices.size(); ++s) {
    const auto& sl = study.slices[s];
    if (values[s].size() != sl.size()) throw InputError("lattice values do not match slice " + std::to_string(s));
    for (std::size_t i = 0; i < sl.size(); ++i) {
      const auto& p = sl.grid.positions[i];
      out << sl.donor_id << ',' << sl.slice_id << ',' << quote(sl.spot_id(i)) << ',' << fmt(p[0]) << ',' << fmt(p[1])
          << ',' << fmt(values[s][i]) << '\n';
    }
  }
  return out.str();
}

json hyper_json(const Hyperparams& h) {
  return json{{"c1", h.c1}, {"v0", h.v0}, {"b1", h.b1}, {"b2", h.b2}, {"b3", h.b3}, {"b4", h.b4},
              {"b5", h.b5}, {"b6", h.b6}, {"delta", h.delta}, {"gamma_prior_sd", h.gamma_prior_sd}};
}

json model_json(const FitResult& r, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  json j;
  j["engine"] = to_string(r.engine);
  j["hyper"] = hyper_json(r.hyper);
  json v;
  v["d"] = r.variant.d;
  v["fixed_eta"] = r.variant.fixed_eta ? json(*r.variant.fixed_eta) : json(nullptr);
  v["fixed_w"] = r.variant.fixed_w ? json(*r.variant.fixed_w) : json(nullptr);
  v["multislice"] = r.variant.multislice;
  v["donors"] = r.variant.donors;
  v["slices_per_donor"] = r.variant.slices_per_donor;
  v["structure"] = structure_name(r.variant.structure);
  v["nonignorable"] = r.variant.nonignorable;
  j["variant"] = v;
  j["covariate_names"] = r.covariate_names;
  json jp = json::array();
  for (auto [a, b] : pairs) jp.push_back(json::array({a, b}));
  j["interaction_pairs"] = jp;
  j["posterior_mean"] = params_json(r.posterior_mean);
  if (r.variational) {
    j["variational"] = json{{"mu", vec_json(r.variational->mu)}, {"L", mat_json(r.variational->L)}};
  }
  json s = json::array();
  for (const auto& p : r.summary.parameters) {
    s.push_back(json{{"parameter", p.name}, {"mean", p.mean}, {"sd", p.sd}, {"ci_low", p.ci_low}, {"ci_high", p.ci_high}});
  }
  j["summary"] = s;
  return j;
}

FittedModel model_from_json(const json& j) {
  try {
    FittedModel m;
    m.engine = parse_engine(j.at("engine").get<std::string>());
    const json& h = j.at("hyper");
    m.hyper.c1 = h.at("c1");
    m.hyper.v0 = h.at("v0");
    m.hyper.b1 = h.at("b1");
    m.hyper.b2 = h.at("b2");
    m.hyper.b3 = h.at("b3");
    m.hyper.b4 = h.at("b4");
    m.hyper.b5 = h.at("b5");
    m.hyper.b6 = h.at("b6");
    m.hyper.delta = h.at("delta");
    m.hyper.gamma_prior_sd = h.at("gamma_prior_sd");
    const json& v = j.at("variant");
    m.variant.d = v.at("d");
    if (!v.at("fixed_eta").is_null()) m.variant.fixed_eta = v.at("fixed_eta").get<double>();
    if (!v.at("fixed_w").is_null()) m.variant.fixed_w = v.at("fixed_w").get<double>();
    m.variant.multislice = v.at("multislice");
    m.variant.donors = v.at("donors");
    m.variant.slices_per_donor = v.at("slices_per_donor");
    m.variant.structure = structure_from(v.at("structure"));
    m.variant.nonignorable = v.at("nonignorable");
    m.covariate_names = j.at("covariate_names").get<std::vector<std::string>>();
    for (const auto& p : j.at("interaction_pairs")) m.interaction_pairs.emplace_back(p.at(0), p.at(1));
    m.posterior_mean = params_from_json(j.at("posterior_mean"));
    if (j.contains("variational")) {
      VariationalState q{vec_from(j["variational"].at("mu")), mat_from(j["variational"].at("L"))};
      q.validate();
      m.variational = q;
    }
    if (static_cast<std::size_t>(m.posterior_mean.beta.size()) != m.variant.d) {
      throw InputError("model artifact: beta length does not match d");
    }
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("model artifact is malformed: ") + e.what());
  }
}

json diagnostics_json(const FitResult& r) {
  json j;
  j["engine"] = to_string(r.engine);
  j["seconds"] = r.seconds;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["warnings"] = r.warnings;
  j["draws"] = r.draws.rows();
  if (r.engine == Engine::kAdvi) j["elbo_trace"] = r.elbo_trace;
  if (r.chain) {
    const auto& c = *r.chain;
    j["nuts"] = json{{"divergences", c.divergences},
                     {"warmup_divergences", c.warmup_divergences},
                     {"mean_depth", c.mean_depth},
                     {"mean_steps", c.mean_steps},
                     {"move_rate", c.move_rate},
                     {"epsilon", c.epsilon},
                     {"gradient_evaluations", c.gradient_evaluations}};
  }
  return j;
}

}  // namespace ssal::io
