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

#include "maskcert/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "maskcert/errors.hpp"
#include "maskcert/rng.hpp"

namespace maskcert {
namespace {

void SeededShuffle(std::vector<DatasetRecord>& records, std::uint64_t seed) {
  RngStream rng(seed);
  for (std::size_t i = records.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.Below(i));
    std::swap(records[i - 1], records[j]);
  }
}

// Shortest text that reads back as the same double.
std::string FormatDouble(double value) {
  char buffer[32];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, end);
}

std::string RateKey(Rate r) { return FormatDouble(r.fraction()); }

Rate RateFromKey(const std::string& key) {
  try {
    return Rate::FromFraction(std::stod(key));
  } catch (const std::exception&) {
    throw DatasetError("bad rate key '" + key + "' in summary");
  }
}

std::ofstream OpenForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::string CsvField(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (const char c : value) {
    if (c == '"') quoted.push_back('"');
    quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

}  // namespace

DatasetFormat DatasetFormatForPath(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  return ext == ".tsv" || ext == ".tab" ? DatasetFormat::kTsv
                                        : DatasetFormat::kJsonLines;
}

DatasetFormat ParseDatasetFormat(const std::string& name) {
  if (name == "jsonl" || name == "json-lines") return DatasetFormat::kJsonLines;
  if (name == "tsv") return DatasetFormat::kTsv;
  throw InvalidArgument("unknown dataset format '" + name + "'");
}

std::vector<DatasetRecord> ParseDataset(std::istream& in, DatasetFormat format,
                                        const LabelSpace& labels,
                                        const std::string& source) {
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    DatasetRecord record;
    if (format == DatasetFormat::kJsonLines) {
      try {
        const auto row = nlohmann::json::parse(line);
        record.text = row.at("text").get<std::string>();
        record.label = row.at("label").get<std::string>();
        if (row.contains("id")) {
          const auto& id = row.at("id");
          record.id = id.is_string() ? id.get<std::string>() : id.dump();
        }
      } catch (const nlohmann::json::exception& e) {
        throw DatasetError(where + "malformed record: " + e.what());
      }
    } else {
      std::vector<std::string> fields;
      std::size_t start = 0;
      for (std::size_t tab = line.find('\t'); tab != std::string::npos;
           tab = line.find('\t', start)) {
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
      }
      fields.push_back(line.substr(start));
      if (fields.size() < 2 || fields.size() > 3) {
        throw DatasetError(where + "expected text<TAB>label[<TAB>id]");
      }
      record.text = fields[0];
      record.label = fields[1];
      if (fields.size() == 3) record.id = fields[2];
    }
    if (record.text.find_first_not_of(" \t\n") == std::string::npos) {
      throw DatasetError(where + "empty text");
    }
    if (!labels.Find(record.label)) {
      throw DatasetError(where + "unknown label '" + record.label + "'");
    }
    if (record.id.empty()) record.id = std::to_string(line_no);
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<DatasetRecord> LoadDataset(const std::filesystem::path& path,
                                       DatasetFormat format,
                                       const LabelSpace& labels) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset " + path.string());
  return ParseDataset(in, format, labels, path.string());
}

std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> SplitHoldout(
    std::vector<DatasetRecord> records, std::uint64_t seed) {
  if (records.size() < 2) {
    throw InvalidArgument("holdout split needs at least two records");
  }
  SeededShuffle(records, seed);
  const std::size_t validation_size = (records.size() + 1) / 2;
  std::vector<DatasetRecord> test(
      std::make_move_iterator(records.begin() +
                              static_cast<std::ptrdiff_t>(validation_size)),
      std::make_move_iterator(records.end()));
  records.resize(validation_size);
  return {std::move(records), std::move(test)};
}

std::vector<DatasetRecord> SampleSubset(std::vector<DatasetRecord> records,
                                        std::size_t count, std::uint64_t seed) {
  SeededShuffle(records, seed);
  if (records.size() > count) records.resize(count);
  return records;
}

double CertifiedAccuracy(std::span<const std::optional<Rate>> radii, Rate d) {
  if (radii.empty()) return 0.0;
  const auto hits = std::count_if(radii.begin(), radii.end(),
                                  [&](const std::optional<Rate>& r) {
                                    return r && *r >= d;
                                  });
  return static_cast<double>(hits) / static_cast<double>(radii.size());
}

SweepResult MaskRateSweep(std::span<const Rate> grid,
                          std::span<const Rate> scales,
                          const RadiusProvider& radii_at) {
  if (grid.empty()) throw InvalidArgument("mask rate grid is empty");
  std::vector<Rate> ordered(grid.begin(), grid.end());
  std::sort(ordered.begin(), ordered.end());
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());

  SweepResult result;
  for (const Rate m : ordered) {
    const std::vector<std::optional<Rate>> radii = radii_at(m);
    for (const Rate d : scales) {
      result.accuracy[d][m] = CertifiedAccuracy(radii, d);
    }
  }
  for (const Rate d : scales) {
    // Ascending mask rates with a strict comparison keep the smallest on ties.
    Rate best = ordered.front();
    double best_acc = -1.0;
    for (const auto& [m, acc] : result.accuracy[d]) {
      if (acc > best_acc) {
        best = m;
        best_acc = acc;
      }
    }
    result.best_mask_rate[d] = best;
  }
  return result;
}

nlohmann::json SummaryToJson(const EvaluationSummary& summary) {
  nlohmann::json methods = nlohmann::json::object();
  for (const auto& [name, metrics] : summary.methods) {
    nlohmann::json m;
    m["clean_acc"] = metrics.clean_accuracy
                         ? nlohmann::json(*metrics.clean_accuracy)
                         : nlohmann::json(nullptr);
    m["empirical_robust_acc"] = metrics.empirical_robust_accuracy;
    methods[name] = std::move(m);
  }
  nlohmann::json curve = nlohmann::json::array();
  for (const CurvePoint& p : summary.certified_curve) {
    curve.push_back({{"method", p.method}, {"d", p.d.fraction()},
                     {"acc", p.accuracy}});
  }
  nlohmann::json best = nlohmann::json::object();
  for (const auto& [method, per_d] : summary.best_mask_rate) {
    nlohmann::json row = nlohmann::json::object();
    for (const auto& [d, m] : per_d) row[RateKey(d)] = m.fraction();
    best[method] = std::move(row);
  }
  return {{"methods", std::move(methods)},
          {"certified_curve", std::move(curve)},
          {"best_mask_rate", std::move(best)},
          {"examples_failed", summary.examples_failed}};
}

EvaluationSummary SummaryFromJson(const nlohmann::json& json) {
  EvaluationSummary summary;
  try {
    for (const auto& [name, m] : json.at("methods").items()) {
      MethodMetrics metrics;
      if (!m.at("clean_acc").is_null()) {
        metrics.clean_accuracy = m.at("clean_acc").get<double>();
      }
      metrics.empirical_robust_accuracy =
          m.at("empirical_robust_acc").get<std::map<std::string, double>>();
      summary.methods[name] = std::move(metrics);
    }
    for (const auto& p : json.at("certified_curve")) {
      summary.certified_curve.push_back(
          {p.at("method").get<std::string>(),
           Rate::FromFraction(p.at("d").get<double>()),
           p.at("acc").get<double>()});
    }
    for (const auto& [method, per_d] : json.at("best_mask_rate").items()) {
      auto& row = summary.best_mask_rate[method];
      for (const auto& [d, m] : per_d.items()) {
        row[RateFromKey(d)] = Rate::FromFraction(m.get<double>());
      }
    }
    summary.examples_failed = json.at("examples_failed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(std::string("malformed summary: ") + e.what());
  }
  return summary;
}

ReportPaths ReportPathsIn(const std::filesystem::path& directory) {
  return {directory / "certified_curve.csv", directory / "summary.json",
          directory / "curve_columns.json"};
}

ReportStatus EmitReport(const EvaluationSummary& summary,
                        const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());
  const ReportPaths paths = ReportPathsIn(directory);

  {
    std::ofstream csv = OpenForWrite(paths.curve_csv);
    csv << "method,d,acc\n";
    for (const CurvePoint& p : summary.certified_curve) {
      csv << CsvField(p.method) << ',' << FormatDouble(p.d.fraction()) << ','
          << FormatDouble(p.accuracy) << '\n';
    }
    if (!csv) throw IoError("failed writing " + paths.curve_csv.string());
  }
  {
    std::ofstream out = OpenForWrite(paths.summary_json);
    out << SummaryToJson(summary).dump(2) << '\n';
    if (!out) throw IoError("failed writing " + paths.summary_json.string());
  }
  {
    nlohmann::json columns = {{"method", nlohmann::json::array()},
                              {"d", nlohmann::json::array()},
                              {"acc", nlohmann::json::array()}};
    for (const CurvePoint& p : summary.certified_curve) {
      columns["method"].push_back(p.method);
      columns["d"].push_back(p.d.fraction());
      columns["acc"].push_back(p.accuracy);
    }
    std::ofstream out = OpenForWrite(paths.columns_json);
    out << columns.dump() << '\n';
    if (!out) throw IoError("failed writing " + paths.columns_json.string());
  }
  return summary.empty() ? ReportStatus::kEmpty : ReportStatus::kOk;
}

}  // namespace maskcert
