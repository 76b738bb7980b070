#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "kdmcse/encoder.hpp"
#include "kdmcse/errors.hpp"
#include "kdmcse/io.hpp"
#include "kdmcse/trainer.hpp"

namespace kdmcse {

namespace detail {

constexpr const char* kCheckpointFormat = "kdmcse-checkpoint-v1";

/// Raw EMB1 blob for one tensor: same byte layout as a feature file (magic,
/// row count, dim, length-prefixed row ids, float32 values).
inline std::string encode_tensor_blob(const std::vector<std::string>& ids, std::size_t rows,
                                      std::size_t cols, const double* data) {
  std::string out;
  out.append("EMB1", 4);
  put_u32le(out, static_cast<std::uint32_t>(rows));
  put_u32le(out, static_cast<std::uint32_t>(cols));
  for (const std::string& id : ids) {
    if (id.size() > 0xffff) fail(ErrorCode::IoError, "tensor row id too long");
    put_u16le(out, static_cast<std::uint16_t>(id.size()));
    out.append(id);
  }
  for (std::size_t k = 0; k < rows * cols; ++k) {
    put_f32le(out, static_cast<float>(data[k]));
  }
  return out;
}

struct TensorBlob {
  std::vector<std::string> ids;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};

inline TensorBlob decode_tensor_blob(const std::string& data, const std::string& origin) {
  ByteReader reader(data, origin);
  if (reader.bytes(4) != "EMB1") fail(ErrorCode::MalformedFile, origin + ": bad tensor magic");
  TensorBlob blob;
  blob.rows = reader.u32();
  blob.cols = reader.u32();
  blob.ids.resize(blob.rows);
  for (std::size_t r = 0; r < blob.rows; ++r) {
    blob.ids[r] = reader.bytes(reader.u16());
  }
  blob.values.resize(blob.rows * blob.cols);
  for (double& v : blob.values) v = static_cast<double>(reader.f32());
  reader.expect_exhausted();
  return blob;
}

inline std::vector<std::string> index_ids(std::size_t rows) {
  std::vector<std::string> ids(rows);
  for (std::size_t r = 0; r < rows; ++r) ids[r] = std::to_string(r);
  return ids;
}

}  // namespace detail

/// Checkpoint layout: u32le JSON header length, the UTF-8 JSON manifest
/// (format tag, dropout rate, tensor names/shapes/offsets), then the tensor
/// blobs back to back. Offsets are relative to the end of the header.
inline std::string encode_checkpoint(const StudentParams& params) {
  // tensor_views hands out mutable pointers; they are only read here
  StudentParams& mutable_params = const_cast<StudentParams&>(params);
  std::string blobs;
  nlohmann::json tensors = nlohmann::json::array();
  for (const TensorView& view : tensor_views(mutable_params)) {
    const std::vector<std::string> ids =
        view.name == "base" ? params.ids : detail::index_ids(view.rows);
    const std::string blob = detail::encode_tensor_blob(ids, view.rows, view.cols, view.data);
    tensors.push_back({{"name", view.name},
                       {"rows", view.rows},
                       {"cols", view.cols},
                       {"offset", blobs.size()}});
    blobs += blob;
  }
  nlohmann::json header = {{"format", detail::kCheckpointFormat},
                           {"dropout_rate", params.dropout_rate},
                           {"tensors", tensors}};
  const std::string header_text = header.dump();
  std::string out;
  put_u32le(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  out += blobs;
  return out;
}

inline void save_checkpoint(const std::filesystem::path& path, const StudentParams& params) {
  write_file(path, encode_checkpoint(params));
}

inline StudentParams decode_checkpoint(const std::string& data, const std::string& origin) {
  if (data.size() < 4) fail(ErrorCode::MalformedFile, origin + ": too short");
  ByteReader prefix(data, origin);
  const std::uint32_t header_len = prefix.u32();
  if (4 + static_cast<std::size_t>(header_len) > data.size()) {
    fail(ErrorCode::MalformedFile, origin + ": header length overruns file");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(data.substr(4, header_len));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::MalformedFile, origin + ": bad JSON header: " + e.what());
  }
  if (!header.contains("format") || header["format"] != detail::kCheckpointFormat) {
    fail(ErrorCode::MalformedFile, origin + ": unknown checkpoint format");
  }
  const std::string blob_region = data.substr(4 + header_len);

  std::map<std::string, detail::TensorBlob> tensors;
  for (const auto& entry : header["tensors"]) {
    const std::string name = entry.at("name").get<std::string>();
    const std::size_t rows = entry.at("rows").get<std::size_t>();
    const std::size_t cols = entry.at("cols").get<std::size_t>();
    const std::size_t offset = entry.at("offset").get<std::size_t>();
    // blob length: 4 + 4 + 4 + sum(2 + id_len) + 4 * rows * cols; parse from
    // the offset and let the reader validate.
    if (offset > blob_region.size()) {
      fail(ErrorCode::MalformedFile, origin + ": tensor offset overruns file");
    }
    // Determine the blob extent by re-walking its structure.
    const std::string rest = blob_region.substr(offset);
    ByteReader probe(rest, origin);
    probe.bytes(4);
    const std::uint32_t r = probe.u32();
    const std::uint32_t c = probe.u32();
    std::size_t blob_size = 12;
    for (std::uint32_t i = 0; i < r; ++i) {
      const std::uint16_t len = probe.u16();
      probe.bytes(len);
      blob_size += 2 + len;
    }
    blob_size += 4ull * r * c;
    if (blob_size > rest.size()) {
      fail(ErrorCode::MalformedFile, origin + ": tensor blob overruns file");
    }
    detail::TensorBlob blob = detail::decode_tensor_blob(rest.substr(0, blob_size), origin);
    if (blob.rows != rows || blob.cols != cols) {
      fail(ErrorCode::MalformedFile, origin + ": tensor shape disagrees with header");
    }
    tensors.emplace(name, std::move(blob));
  }

  auto take = [&](const std::string& name) -> detail::TensorBlob& {
    auto it = tensors.find(name);
    if (it == tensors.end()) {
      fail(ErrorCode::MalformedFile, origin + ": missing tensor " + name);
    }
    return it->second;
  };
  auto to_matrix = [](const detail::TensorBlob& blob) {
    Matrix m(blob.rows, blob.cols);
    m.data = blob.values;
    return m;
  };
  auto load_head = [&](const std::string& prefix) {
    AffineHead head;
    head.w1 = to_matrix(take(prefix + ".w1"));
    head.b1 = take(prefix + ".b1").values;
    head.w2 = to_matrix(take(prefix + ".w2"));
    head.b2 = take(prefix + ".b2").values;
    if (head.w1.rows != head.b1.size() || head.w2.rows != head.b2.size() ||
        head.w2.cols != head.w1.rows) {
      fail(ErrorCode::MalformedFile, origin + ": inconsistent head shapes for " + prefix);
    }
    return head;
  };

  StudentParams params;
  detail::TensorBlob& base = take("base");
  params.ids = base.ids;
  for (std::size_t i = 0; i < params.ids.size(); ++i) {
    if (!params.row_of.emplace(params.ids[i], i).second) {
      fail(ErrorCode::MalformedFile, origin + ": duplicate sentence id " + params.ids[i]);
    }
  }
  params.base = to_matrix(base);
  params.head_simcse = load_head("head_simcse");
  params.head_grounded = load_head("head_grounded");
  params.head_teacher_text = load_head("head_teacher_text");
  params.head_teacher_visual = load_head("head_teacher_visual");
  if (!header.contains("dropout_rate") || !header["dropout_rate"].is_number()) {
    fail(ErrorCode::MalformedFile, origin + ": missing dropout_rate");
  }
  params.dropout_rate = header["dropout_rate"].get<double>();
  return params;
}

inline StudentParams load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path), path.string());
}

}  // namespace kdmcse
