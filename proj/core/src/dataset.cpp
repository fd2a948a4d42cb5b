#include "cuedesc/dataset.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include "json_detail.hpp"

namespace cuedesc {

namespace {

namespace fs = std::filesystem;
using detail::Json;

constexpr char kDescriptorMagic[4] = {'B', 'D', 'S', 'C'};
constexpr std::uint32_t kDescriptorVersion = 1;
constexpr int kManifestVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[offset + i]} << (8 * i);
  return v;
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("missing file: " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DatasetError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DatasetError("failed writing " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  while (!text.empty()) {
    auto pos = text.find('\n');
    auto line = text.substr(0, pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    if (pos == std::string_view::npos) break;
    text.remove_prefix(pos + 1);
  }
  return out;
}

std::string format_value(const CueValue& value) {
  char buf[64];
  std::to_chars_result r{};
  if (const auto* c = std::get_if<ContinuousValue>(&value)) {
    r = std::to_chars(buf, buf + sizeof buf, c->value);
  } else {
    r = std::to_chars(buf, buf + sizeof buf, std::get<SelectorValue>(value).index);
  }
  return std::string(buf, r.ptr);
}

CueValue parse_value(std::string_view text, CueKind kind, const std::string& where) {
  const char* end = text.data() + text.size();
  if (kind == CueKind::continuous) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw DatasetError(where + ": expected a decimal, got '" + std::string(text) + "'");
    return ContinuousValue{v};
  }
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw DatasetError(where + ": expected an integer, got '" + std::string(text) + "'");
  return SelectorValue{v};
}

bool safe_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                    c == '-' || c == '.';
    if (!ok) return false;
  }
  return id != "." && id != "..";
}

std::string kind_name(CueKind kind) { return kind == CueKind::continuous ? "continuous" : "selector"; }

}  // namespace

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const std::set<std::string>& GroundTruth::relevant_to(const std::string& query) const {
  static const std::set<std::string> kNone;
  auto it = relevant.find(query);
  return it == relevant.end() ? kNone : it->second;
}

std::size_t Dataset::descriptor_bits() const noexcept {
  for (const auto& image : images) {
    if (!image.descriptors.empty()) return image.descriptors.front().size();
  }
  return 0;
}

std::optional<std::size_t> Dataset::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < cue_columns.size(); ++i) {
    if (cue_columns[i].name == name) return i;
  }
  return std::nullopt;
}

void Dataset::validate() const {
  std::set<std::string> columns;
  for (const auto& c : cue_columns) {
    if (c.name.empty() || c.name.find(',') != std::string::npos) {
      throw DatasetError("cue column names must be non-empty and comma-free");
    }
    if (!columns.insert(c.name).second) throw DatasetError("duplicate cue column '" + c.name + "'");
  }
  std::unordered_set<std::string> ids;
  const std::size_t bits = descriptor_bits();
  for (const auto& image : images) {
    if (!ids.insert(image.image_id).second) throw DatasetError("duplicate image id '" + image.image_id + "'");
    try {
      image.validate(cue_columns.size());
    } catch (const std::invalid_argument& e) {
      throw DatasetError(e.what());
    }
    if (!image.descriptors.empty() && image.descriptors.front().size() != bits) {
      throw DatasetError("image '" + image.image_id + "' has descriptors of a different length");
    }
    for (std::size_t row = 0; row < image.cue_values.size(); ++row) {
      for (std::size_t c = 0; c < cue_columns.size(); ++c) {
        const bool continuous = std::holds_alternative<ContinuousValue>(image.cue_values[row][c]);
        if (continuous != (cue_columns[c].kind == CueKind::continuous)) {
          throw DatasetError("image '" + image.image_id + "' row " + std::to_string(row) + ": cue '" +
                             cue_columns[c].name + "' has the wrong kind");
        }
      }
    }
  }
  for (const auto& [query, relevant] : ground_truth.relevant) {
    if (!ids.contains(query)) throw DatasetError("ground truth names unknown image '" + query + "'");
    for (const auto& r : relevant) {
      if (!ids.contains(r)) throw DatasetError("ground truth names unknown image '" + r + "'");
    }
  }
}

std::vector<std::uint8_t> encode_descriptor_file(std::span<const BinaryDescriptor> descriptors) {
  std::vector<std::uint8_t> out(std::begin(kDescriptorMagic), std::end(kDescriptorMagic));
  put_u32(out, kDescriptorVersion);
  put_u32(out, static_cast<std::uint32_t>(descriptors.size()));
  const std::size_t bits = descriptors.empty() ? 0 : descriptors.front().size();
  put_u32(out, static_cast<std::uint32_t>(bits));
  out.reserve(out.size() + descriptors.size() * serialized_size(bits));
  for (const auto& d : descriptors) {
    if (d.size() != bits) throw IncompatibleDescriptors("descriptor file entries must share one length");
    serialize(d, out);
  }
  return out;
}

std::vector<BinaryDescriptor> decode_descriptor_file(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16) throw FormatError("descriptor file shorter than its header");
  if (std::memcmp(bytes.data(), kDescriptorMagic, 4) != 0) throw FormatError("descriptor file has bad magic");
  if (get_u32(bytes, 4) != kDescriptorVersion) throw FormatError("unsupported descriptor file version");
  const std::uint32_t count = get_u32(bytes, 8);
  const std::uint32_t bits = get_u32(bytes, 12);
  if (count > 0 && bits == 0) throw FormatError("descriptor file declares zero-bit descriptors");
  if (count > 0 && (bytes.size() - 16) / serialized_size(bits) < count) throw FormatError("descriptor file truncated");
  std::vector<BinaryDescriptor> out;
  out.reserve(count);
  std::size_t offset = 16;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto d = deserialize(bytes, offset);
    if (d.size() != bits) throw FormatError("descriptor " + std::to_string(i) + " length differs from header");
    out.push_back(std::move(d));
  }
  if (offset != bytes.size()) throw FormatError("trailing bytes in descriptor file");
  return out;
}

void save_dataset(const Dataset& dataset, const fs::path& directory, const std::string& generator_json) {
  dataset.validate();
  fs::create_directories(directory);

  Json manifest;
  manifest["format"] = "cuedesc-dataset";
  manifest["version"] = kManifestVersion;
  manifest["descriptor_bits"] = dataset.descriptor_bits();
  Json columns = Json::array();
  for (const auto& c : dataset.cue_columns) columns.push_back({{"name", c.name}, {"kind", kind_name(c.kind)}});
  manifest["cue_columns"] = std::move(columns);

  Json images = Json::array();
  for (const auto& image : dataset.images) {
    if (!safe_id(image.image_id)) {
      throw DatasetError("image id '" + image.image_id + "' is not usable as a file name ([A-Za-z0-9_.-])");
    }
    Json entry;
    entry["id"] = image.image_id;
    entry["role"] = std::string(to_string(image.role));

    const auto desc_rel = "descriptors/" + image.image_id + ".bdsc";
    auto bytes = encode_descriptor_file(image.descriptors);
    if (image.descriptors.empty()) {
      // Record the dataset length so empty images still declare it.
      const auto bits = static_cast<std::uint32_t>(dataset.descriptor_bits());
      for (int i = 0; i < 4; ++i) bytes[12 + i] = static_cast<std::uint8_t>(bits >> (8 * i));
    }
    write_file(directory / desc_rel, bytes);
    entry["descriptors"] = desc_rel;
    entry["descriptors_fnv1a64"] = hex64(fnv1a64(bytes));
    entry["descriptor_count"] = image.descriptors.size();

    if (!dataset.cue_columns.empty()) {
      std::string csv;
      for (std::size_t c = 0; c < dataset.cue_columns.size(); ++c) {
        csv += (c ? "," : "") + dataset.cue_columns[c].name;
      }
      csv += '\n';
      for (const auto& row : image.cue_values) {
        for (std::size_t c = 0; c < row.size(); ++c) {
          if (c) csv += ',';
          csv += format_value(row[c]);
        }
        csv += '\n';
      }
      const auto cue_rel = "cues/" + image.image_id + ".csv";
      write_text(directory / cue_rel, csv);
      entry["cues"] = cue_rel;
      entry["cues_fnv1a64"] =
          hex64(fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(csv.data()), csv.size())));
    }
    entry["cue_arity"] = dataset.cue_columns.size();
    images.push_back(std::move(entry));
  }
  manifest["images"] = std::move(images);

  std::string gt = "query_id,relevant_id\n";
  for (const auto& [query, relevant] : dataset.ground_truth.relevant) {
    for (const auto& r : relevant) gt += query + "," + r + "\n";
  }
  write_text(directory / "ground_truth.csv", gt);
  manifest["ground_truth"] = "ground_truth.csv";
  manifest["ground_truth_fnv1a64"] =
      hex64(fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(gt.data()), gt.size())));
  if (!generator_json.empty()) manifest["generator"] = Json::parse(generator_json);

  write_text(directory / "manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const fs::path& manifest_path) {
  const fs::path manifest_file = fs::is_directory(manifest_path) ? manifest_path / "manifest.json" : manifest_path;
  const fs::path root = manifest_file.parent_path();
  const auto manifest_bytes = read_file(manifest_file);
  Json manifest;
  try {
    manifest = Json::parse(manifest_bytes.begin(), manifest_bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(manifest_file.string() + ": " + e.what());
  }

  const auto fail = [&](const std::string& what) -> DatasetError {
    return DatasetError(manifest_file.string() + ": " + what);
  };
  const auto verify_checksum = [&](const Json& entry, const char* key, std::span<const std::uint8_t> bytes,
                                   const fs::path& file) {
    if (entry.contains(key) && entry[key].get<std::string>() != hex64(fnv1a64(bytes))) {
      throw fail("checksum mismatch for " + file.string());
    }
  };

  try {
    if (manifest.value("format", "") != "cuedesc-dataset") throw fail("format must be \"cuedesc-dataset\"");
    if (manifest.value("version", 0) != kManifestVersion) throw fail("unsupported manifest version");

    Dataset dataset;
    for (const auto& c : manifest.at("cue_columns")) {
      const auto kind = c.at("kind").get<std::string>();
      if (kind != "continuous" && kind != "selector") throw fail("cue column kind must be continuous or selector");
      dataset.cue_columns.push_back(
          {c.at("name").get<std::string>(), kind == "continuous" ? CueKind::continuous : CueKind::selector});
    }
    const auto declared_bits = manifest.at("descriptor_bits").get<std::size_t>();

    for (const auto& entry : manifest.at("images")) {
      ImageRecord image;
      image.image_id = entry.at("id").get<std::string>();
      image.role = parse_image_role(entry.at("role").get<std::string>());
      const auto arity = entry.value("cue_arity", dataset.cue_columns.size());
      if (arity != dataset.cue_columns.size()) {
        throw fail("image '" + image.image_id + "' declares cue arity " + std::to_string(arity) + ", expected " +
                   std::to_string(dataset.cue_columns.size()));
      }

      const fs::path desc_path = root / entry.at("descriptors").get<std::string>();
      const auto bytes = read_file(desc_path);
      verify_checksum(entry, "descriptors_fnv1a64", bytes, desc_path);
      try {
        image.descriptors = decode_descriptor_file(bytes);
      } catch (const FormatError& e) {
        throw fail(desc_path.string() + ": " + e.what());
      }
      if (!image.descriptors.empty() && image.descriptors.front().size() != declared_bits) {
        throw fail(desc_path.string() + ": descriptor length differs from descriptor_bits");
      }
      if (entry.contains("descriptor_count") &&
          entry["descriptor_count"].get<std::size_t>() != image.descriptors.size()) {
        throw fail(desc_path.string() + ": descriptor count differs from the manifest");
      }

      if (!dataset.cue_columns.empty()) {
        const fs::path cue_path = root / entry.at("cues").get<std::string>();
        const auto cue_bytes = read_file(cue_path);
        verify_checksum(entry, "cues_fnv1a64", cue_bytes, cue_path);
        const std::string_view text(reinterpret_cast<const char*>(cue_bytes.data()), cue_bytes.size());
        const auto lines = lines_of(text);
        if (lines.empty()) throw fail(cue_path.string() + ": missing header");
        const auto header = split(lines.front(), ',');
        if (header.size() != dataset.cue_columns.size()) throw fail(cue_path.string() + ": header arity mismatch");
        for (std::size_t c = 0; c < header.size(); ++c) {
          if (header[c] != dataset.cue_columns[c].name) {
            throw fail(cue_path.string() + ": header column " + std::to_string(c) + " should be '" +
                       dataset.cue_columns[c].name + "'");
          }
        }
        for (std::size_t l = 1; l < lines.size(); ++l) {
          if (lines[l].empty() && l + 1 == lines.size()) break;
          const auto fields = split(lines[l], ',');
          const std::string where = cue_path.string() + ":" + std::to_string(l + 1);
          if (fields.size() != dataset.cue_columns.size()) throw fail(where + ": wrong number of fields");
          std::vector<CueValue> row;
          for (std::size_t c = 0; c < fields.size(); ++c) {
            row.push_back(parse_value(fields[c], dataset.cue_columns[c].kind, where));
          }
          image.cue_values.push_back(std::move(row));
        }
      } else {
        image.cue_values.assign(image.descriptors.size(), {});
      }
      dataset.images.push_back(std::move(image));
    }

    const fs::path gt_path = root / manifest.at("ground_truth").get<std::string>();
    const auto gt_bytes = read_file(gt_path);
    verify_checksum(manifest, "ground_truth_fnv1a64", gt_bytes, gt_path);
    const auto gt_lines = lines_of(std::string_view(reinterpret_cast<const char*>(gt_bytes.data()), gt_bytes.size()));
    if (gt_lines.empty() || gt_lines.front() != "query_id,relevant_id") {
      throw fail(gt_path.string() + ": header must be query_id,relevant_id");
    }
    for (std::size_t l = 1; l < gt_lines.size(); ++l) {
      if (gt_lines[l].empty() && l + 1 == gt_lines.size()) break;
      const auto fields = split(gt_lines[l], ',');
      if (fields.size() != 2) throw fail(gt_path.string() + ":" + std::to_string(l + 1) + ": expected two fields");
      dataset.ground_truth.relevant[std::string(fields[0])].insert(std::string(fields[1]));
    }

    dataset.validate();
    return dataset;
  } catch (const DatasetError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  } catch (const std::exception& e) {
    throw fail(e.what());
  }
}

}  // namespace cuedesc
