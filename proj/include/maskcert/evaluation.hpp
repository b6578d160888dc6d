// Copyright 2026 The maskcert Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "maskcert/labels.hpp"
#include "maskcert/text.hpp"

namespace maskcert {

struct DatasetRecord {
  std::string id;
  std::string text;
  std::string label;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

enum class DatasetFormat { kJsonLines, kTsv };

// .tsv/.tab are tab-separated, everything else JSON lines.
DatasetFormat DatasetFormatForPath(const std::filesystem::path& path);
DatasetFormat ParseDatasetFormat(const std::string& name);

// JSON lines: {"text", "label", "id"?}. TSV: text<TAB>label[<TAB>id]. Missing
// ids become the 1-based line number. Blank lines are skipped. Any malformed
// row, empty text or label outside `labels` throws DatasetError naming the
// source and line.
std::vector<DatasetRecord> ParseDataset(std::istream& in, DatasetFormat format,
                                        const LabelSpace& labels,
                                        const std::string& source = "<input>");
std::vector<DatasetRecord> LoadDataset(const std::filesystem::path& path,
                                       DatasetFormat format,
                                       const LabelSpace& labels);

// Seeded shuffle, then halves; the first (validation) half takes the extra
// record when the count is odd. Throws InvalidArgument with < 2 records.
std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> SplitHoldout(
    std::vector<DatasetRecord> records, std::uint64_t seed);

// Seeded random subset of at most `count` records, in shuffled order.
std::vector<DatasetRecord> SampleSubset(std::vector<DatasetRecord> records,
                                        std::size_t count, std::uint64_t seed);

// Fraction of radii >= d; nullopt (not certified) never counts.
double CertifiedAccuracy(std::span<const std::optional<Rate>> radii, Rate d);

struct SweepResult {
  std::map<Rate, Rate> best_mask_rate;                  // d -> m*
  std::map<Rate, std::map<Rate, double>> accuracy;      // d -> m -> acc
};

// Radii of the validation examples when smoothing at a given mask rate.
using RadiusProvider =
    std::function<std::vector<std::optional<Rate>>(Rate mask_rate)>;

// For each scale d, the grid mask rate with the highest certified accuracy at
// d; ties go to the smaller mask rate. Throws InvalidArgument on an empty
// grid.
SweepResult MaskRateSweep(std::span<const Rate> grid,
                          std::span<const Rate> scales,
                          const RadiusProvider& radii_at);

struct CurvePoint {
  std::string method;
  Rate d;
  double accuracy = 0.0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct MethodMetrics {
  std::optional<double> clean_accuracy;
  std::map<std::string, double> empirical_robust_accuracy;  // per attack

  friend bool operator==(const MethodMetrics&, const MethodMetrics&) = default;
};

struct EvaluationSummary {
  std::map<std::string, MethodMetrics> methods;
  std::vector<CurvePoint> certified_curve;
  std::map<std::string, std::map<Rate, Rate>> best_mask_rate;  // method -> d -> m*
  std::uint64_t examples_failed = 0;

  bool empty() const { return methods.empty() && certified_curve.empty(); }
  friend bool operator==(const EvaluationSummary&,
                         const EvaluationSummary&) = default;
};

nlohmann::json SummaryToJson(const EvaluationSummary& summary);
// Throws DatasetError on a malformed document.
EvaluationSummary SummaryFromJson(const nlohmann::json& json);

enum class ReportStatus { kOk, kEmpty };

struct ReportPaths {
  std::filesystem::path curve_csv;     // method,d,acc
  std::filesystem::path summary_json;
  std::filesystem::path columns_json;  // {"method": [...], "d": [...], "acc": [...]}
};

ReportPaths ReportPathsIn(const std::filesystem::path& directory);

// Writes the three report files. An empty summary still produces
// headers-only files and returns kEmpty. Throws IoError.
ReportStatus EmitReport(const EvaluationSummary& summary,
                        const std::filesystem::path& directory);

}  // namespace maskcert
