#pragma once

#include "tlnmf/types.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tlnmf {

/// Matrix CSV format: a "# rows cols" header line, then one comma-separated
/// line per row, values printed with 17 significant digits, LF endings.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

/// Generic numeric table with a named header row.
void write_table_csv(const std::filesystem::path& path,
                     const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& rows);

/// Flat key=value text files (configs and bundle manifests). Keys keep file
/// order on write; '#' starts a comment line.
using KeyValues = std::map<std::string, std::string>;
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);
KeyValues read_key_values(const std::filesystem::path& path);

/// RealizationSet bundle: directory with manifest.txt, one y_<s>.csv file per
/// realization matrix.
void write_realizations(const std::filesystem::path& dir, const RealizationSet& data,
                        const KeyValues& spec_fields = {});
RealizationSet read_realizations(const std::filesystem::path& dir);

/// GroundTruth bundle: phi_bar.csv, w_bar.csv, h_bar.csv, sigma_<n>.csv,
/// listed in truth_manifest.txt.
void write_ground_truth(const std::filesystem::path& dir, const GroundTruth& truth);
GroundTruth read_ground_truth(const std::filesystem::path& dir);

std::string format_double(double v);

}  // namespace tlnmf
