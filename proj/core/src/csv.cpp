#include "tlnmf/csv.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tlnmf {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix_csv(const fs::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  out << "# " << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ",";
      out << format_double(m(i, j));
    }
    out << "\n";
  }
  if (!out) throw ConfigError("write failed: " + path.string());
}

Matrix read_matrix_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw ConfigError("missing '# rows cols' header: " + path.string());
  Eigen::Index rows = 0, cols = 0;
  {
    std::istringstream hs(line.substr(2));
    hs >> rows >> cols;
    if (rows < 1 || cols < 1) throw ConfigError("bad header in " + path.string());
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) throw ConfigError("truncated matrix file: " + path.string());
    std::istringstream ls(line);
    std::string cell;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!std::getline(ls, cell, ','))
        throw ConfigError("short row " + std::to_string(i) + " in " + path.string());
      m(i, j) = std::stod(cell);
    }
  }
  return m;
}

void write_table_csv(const fs::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out << ",";
    out << header[j];
  }
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw ConfigError("table row width disagrees with header: " + path.string());
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ",";
      out << format_double(row[j]);
    }
    out << "\n";
  }
}

void write_key_values(const fs::path& path, const KeyValues& kv) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path.string());
  for (const auto& [k, v] : kv) out << k << "=" << v << "\n";
}

KeyValues read_key_values(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path.string());
  KeyValues kv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key=value in " + path.string() + ": " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

namespace {

std::string numbered(const char* stem, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%05d.csv", stem, i);
  return buf;
}

}  // namespace

void write_realizations(const fs::path& dir, const RealizationSet& data,
                        const KeyValues& spec_fields) {
  fs::create_directories(dir);
  KeyValues manifest = spec_fields;
  manifest["M"] = std::to_string(data.M());
  manifest["N"] = std::to_string(data.N());
  manifest["S"] = std::to_string(data.S());
  for (int s = 0; s < data.S(); ++s) {
    const std::string name = numbered("y", s);
    write_matrix_csv(dir / name, data.realization(s));
    manifest["realization_" + std::to_string(s)] = name;
  }
  write_key_values(dir / "manifest.txt", manifest);
}

RealizationSet read_realizations(const fs::path& dir) {
  const KeyValues manifest = read_key_values(dir / "manifest.txt");
  const int S = std::stoi(manifest.at("S"));
  std::vector<Matrix> ys;
  ys.reserve(S);
  for (int s = 0; s < S; ++s)
    ys.push_back(read_matrix_csv(dir / manifest.at("realization_" + std::to_string(s))));
  return RealizationSet(ys);
}

void write_ground_truth(const fs::path& dir, const GroundTruth& truth) {
  fs::create_directories(dir);
  KeyValues manifest;
  manifest["N"] = std::to_string(truth.sigmas_true.size());
  write_matrix_csv(dir / "phi_bar.csv", truth.phi_bar.mat());
  write_matrix_csv(dir / "w_bar.csv", truth.w_bar);
  write_matrix_csv(dir / "h_bar.csv", truth.h_bar);
  for (int n = 0; n < static_cast<int>(truth.sigmas_true.size()); ++n)
    write_matrix_csv(dir / numbered("sigma", n), truth.sigmas_true[n]);
  write_key_values(dir / "truth_manifest.txt", manifest);
}

GroundTruth read_ground_truth(const fs::path& dir) {
  const KeyValues manifest = read_key_values(dir / "truth_manifest.txt");
  const int N = std::stoi(manifest.at("N"));
  GroundTruth truth{OrthogonalTransform(read_matrix_csv(dir / "phi_bar.csv")),
                    read_matrix_csv(dir / "w_bar.csv"),
                    read_matrix_csv(dir / "h_bar.csv"),
                    {}};
  truth.sigmas_true.reserve(N);
  for (int n = 0; n < N; ++n)
    truth.sigmas_true.push_back(read_matrix_csv(dir / numbered("sigma", n)));
  return truth;
}

}  // namespace tlnmf
