#pragma once

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "kdmcse/errors.hpp"
#include "kdmcse/io.hpp"
#include "kdmcse/numerics.hpp"
#include "kdmcse/similarity.hpp"

namespace kdmcse {

/// Frozen teacher features for one modality. Immutable after construction;
/// all accessors return copies.
struct FeatureTable {
  Modality modality = Modality::text;
  std::vector<std::string> ids;
  std::map<std::string, std::size_t> row_of;
  Matrix features;
  bool normalized = false;

  std::size_t size() const { return ids.size(); }
  std::size_t dim() const { return features.cols; }
  bool has(const std::string& id) const { return row_of.count(id) != 0; }

  Vector row(std::size_t r) const { return features.row(r); }

  Vector row_for(const std::string& id) const {
    auto it = row_of.find(id);
    if (it == row_of.end()) fail(ErrorCode::UnknownId, id);
    return features.row(it->second);
  }
};

inline FeatureTable make_feature_table(Modality modality, std::vector<std::string> ids,
                                       Matrix features, bool normalize) {
  if (ids.size() != features.rows) {
    fail(ErrorCode::ShapeMismatch,
         "feature table: " + std::to_string(ids.size()) + " ids for " +
             std::to_string(features.rows) + " rows");
  }
  if (features.rows == 0 || features.cols == 0) {
    fail(ErrorCode::MalformedFile, "feature table: empty row count or dim");
  }
  FeatureTable table;
  table.modality = modality;
  table.ids = std::move(ids);
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    if (!table.row_of.emplace(table.ids[i], i).second) {
      fail(ErrorCode::DuplicateId, table.ids[i]);
    }
  }
  for (double v : features.data) {
    if (!std::isfinite(v)) fail(ErrorCode::MalformedFile, "feature table: non-finite value");
  }
  for (std::size_t r = 0; r < features.rows; ++r) {
    double n2 = 0.0;
    for (std::size_t c = 0; c < features.cols; ++c) {
      n2 += features.at(r, c) * features.at(r, c);
    }
    if (n2 == 0.0) fail(ErrorCode::ZeroNormRow, "row " + std::to_string(r));
    if (normalize) {
      const double inv = 1.0 / std::sqrt(n2);
      for (std::size_t c = 0; c < features.cols; ++c) features.at(r, c) *= inv;
    }
  }
  table.features = std::move(features);
  table.normalized = normalize;
  return table;
}

namespace detail {

constexpr char kFeatureMagic[4] = {'E', 'M', 'B', '1'};

inline FeatureTable parse_binary_features(const std::string& data, const std::string& origin,
                                          Modality modality, bool normalize) {
  ByteReader reader(data, origin);
  const std::string magic = reader.bytes(4);
  if (magic != std::string(kFeatureMagic, 4)) {
    fail(ErrorCode::MalformedFile, origin + ": bad magic");
  }
  const std::uint32_t rows = reader.u32();
  const std::uint32_t cols = reader.u32();
  if (rows == 0) fail(ErrorCode::MalformedFile, origin + ": zero row count");
  if (cols == 0) fail(ErrorCode::MalformedFile, origin + ": zero dim");
  std::vector<std::string> ids(rows);
  for (std::uint32_t r = 0; r < rows; ++r) {
    const std::uint16_t len = reader.u16();
    if (len == 0) fail(ErrorCode::MalformedFile, origin + ": empty id");
    ids[r] = reader.bytes(len);
  }
  Matrix features(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) {
      features.at(r, c) = static_cast<double>(reader.f32());
    }
  }
  reader.expect_exhausted();
  return make_feature_table(modality, std::move(ids), std::move(features), normalize);
}

inline FeatureTable parse_tsv_features(const std::string& data, const std::string& origin,
                                       Modality modality, bool normalize) {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::istringstream stream(data);
  std::string line;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string field;
    if (!std::getline(fields, field, '\t') || field.empty()) {
      fail(ErrorCode::MalformedFile, origin + ": missing id");
    }
    ids.push_back(field);
    std::vector<double> values;
    while (std::getline(fields, field, '\t')) {
      try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        values.push_back(v);
      } catch (const std::exception&) {
        fail(ErrorCode::MalformedFile, origin + ": bad number '" + field + "'");
      }
    }
    if (values.empty()) fail(ErrorCode::MalformedFile, origin + ": row without values");
    if (!rows.empty() && values.size() != rows.front().size()) {
      fail(ErrorCode::MalformedFile, origin + ": ragged rows");
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) fail(ErrorCode::MalformedFile, origin + ": no rows");
  Matrix features(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < features.cols; ++c) features.at(r, c) = rows[r][c];
  }
  return make_feature_table(modality, std::move(ids), std::move(features), normalize);
}

}  // namespace detail

/// Loads a feature file. Binary EMB1 is detected by magic; anything else is
/// parsed as the TSV fixture format (id, tab, values). Rows are
/// L2-normalized on load by default so teacher cosines reduce to dots.
inline FeatureTable load_features(const std::filesystem::path& path, Modality modality,
                                  bool normalize = true) {
  const std::string data = read_file(path);
  if (data.size() >= 4 && data.compare(0, 4, detail::kFeatureMagic, 4) == 0) {
    return detail::parse_binary_features(data, path.string(), modality, normalize);
  }
  return detail::parse_tsv_features(data, path.string(), modality, normalize);
}

/// Serializes a table in the EMB1 layout: magic, u32le rows, u32le dim,
/// length-prefixed ids, then float32le values row-major.
inline std::string encode_features(const FeatureTable& table) {
  std::string out;
  out.append(detail::kFeatureMagic, 4);
  put_u32le(out, static_cast<std::uint32_t>(table.size()));
  put_u32le(out, static_cast<std::uint32_t>(table.dim()));
  for (const std::string& id : table.ids) {
    if (id.size() > 0xffff) fail(ErrorCode::IoError, "id too long: " + id);
    put_u16le(out, static_cast<std::uint16_t>(id.size()));
    out.append(id);
  }
  for (double v : table.features.data) put_f32le(out, static_cast<float>(v));
  return out;
}

inline void write_features(const std::filesystem::path& path, const FeatureTable& table) {
  write_file(path, encode_features(table));
}

/// Rows in the requested order; repeated ids give repeated rows.
inline Batch gather(const FeatureTable& table, const std::vector<std::string>& ids) {
  Batch batch;
  batch.reserve(ids.size());
  for (const std::string& id : ids) batch.push_back(table.row_for(id));
  return batch;
}

}  // namespace kdmcse
