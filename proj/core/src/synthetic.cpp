#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "cuedesc/dataset.hpp"
#include "json_detail.hpp"

namespace cuedesc {

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw std::invalid_argument(std::string(field) + ": " + what);
}

BinaryDescriptor random_descriptor(std::uint32_t bits, std::mt19937_64& rng) {
  std::vector<std::uint64_t> words(words_for_bits(bits));
  for (auto& w : words) w = rng();
  if (const auto tail = bits % kWordBits; tail != 0) words.back() &= (std::uint64_t{1} << tail) - 1;
  return BinaryDescriptor(std::move(words), bits);
}

// Independent per-bit flips with probability p, walking geometric gaps
// between flipped positions.
BinaryDescriptor flip_bits(const BinaryDescriptor& d, double p, std::mt19937_64& rng) {
  if (p <= 0.0) return d;
  if (p >= 1.0) return d.complement();
  std::vector<std::uint64_t> words(d.words().begin(), d.words().end());
  std::geometric_distribution<std::uint64_t> gap(p);
  for (std::uint64_t i = gap(rng); i < d.size(); i += 1 + gap(rng)) {
    words[i / kWordBits] ^= std::uint64_t{1} << (i % kWordBits);
  }
  return BinaryDescriptor(std::move(words), d.size());
}

struct Keypoint {
  std::int64_t u = 0;
  std::int64_t v = 0;
  std::int64_t label = 0;
};

std::int64_t clamp_pixel(double x, std::uint32_t extent) {
  const double r = std::round(x);
  if (r < 0.0) return 0;
  if (r > extent - 1.0) return extent - 1;
  return static_cast<std::int64_t>(r);
}

std::vector<CueValue> cue_row(const Keypoint& k) {
  return {ContinuousValue{static_cast<double>(k.u)}, ContinuousValue{static_cast<double>(k.v)},
          SelectorValue{k.label}};
}

std::string place_id(std::uint32_t place, std::uint32_t visit) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%05u_v%u", place, visit);
  return buf;
}

}  // namespace

void SyntheticConfig::validate() const {
  require(place_count >= 1, "place_count", "must be >= 1");
  require(descriptors_per_image >= 1, "descriptors_per_image", "must be >= 1");
  require(descriptor_bits >= 1, "descriptor_bits", "must be >= 1");
  require(bit_flip_probability >= 0.0 && bit_flip_probability <= 0.5, "bit_flip_probability", "must be in [0, 0.5]");
  require(std::isfinite(keypoint_noise_sigma) && keypoint_noise_sigma >= 0.0, "keypoint_noise_sigma",
          "must be finite and >= 0");
  require(image_width >= 1, "image_width", "must be >= 1");
  require(image_height >= 1, "image_height", "must be >= 1");
  require(label_count >= 2, "label_count", "must be >= 2");
  require(label_flip_probability >= 0.0 && label_flip_probability <= 1.0, "label_flip_probability",
          "must be in [0, 1]");
  require(appearance_group_size >= 1, "appearance_group_size", "must be >= 1");
  require(appearance_group_noise >= 0.0 && appearance_group_noise <= 0.5, "appearance_group_noise",
          "must be in [0, 0.5]");
  require(feature_persistence >= 0.0 && feature_persistence <= 1.0, "feature_persistence", "must be in [0, 1]");
}

std::vector<CueColumn> synthetic_cue_columns() {
  return {{"u", CueKind::continuous}, {"v", CueKind::continuous}, {"label", CueKind::selector}};
}

Dataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  std::uniform_int_distribution<std::int64_t> pick_u(0, config.image_width - 1);
  std::uniform_int_distribution<std::int64_t> pick_v(0, config.image_height - 1);
  std::uniform_int_distribution<std::int64_t> pick_label(0, config.label_count - 1);
  std::uniform_int_distribution<std::int64_t> pick_other_label(0, config.label_count - 2);
  std::bernoulli_distribution flip_label(config.label_flip_probability);
  std::bernoulli_distribution persists(config.feature_persistence);
  const bool jitter = config.keypoint_noise_sigma > 0.0;
  std::normal_distribution<double> noise(0.0, jitter ? config.keypoint_noise_sigma : 1.0);

  const auto n = config.descriptors_per_image;
  const auto random_keypoint = [&] { return Keypoint{pick_u(rng), pick_v(rng), pick_label(rng)}; };

  Dataset dataset;
  dataset.cue_columns = synthetic_cue_columns();

  for (std::uint32_t i = 0; i < config.distractor_image_count; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "d%05u", i);
    ImageRecord image{id, {}, {}, ImageRole::reference};
    for (std::uint32_t k = 0; k < n; ++k) {
      image.descriptors.push_back(random_descriptor(config.descriptor_bits, rng));
      image.cue_values.push_back(cue_row(random_keypoint()));
    }
    dataset.images.push_back(std::move(image));
  }

  // Canonical content per place.
  std::vector<std::vector<BinaryDescriptor>> canonical(config.place_count);
  std::vector<std::vector<Keypoint>> keypoints(config.place_count);
  std::vector<BinaryDescriptor> group_template;
  for (std::uint32_t p = 0; p < config.place_count; ++p) {
    if (p % config.appearance_group_size == 0) {
      group_template.clear();
      for (std::uint32_t k = 0; k < n; ++k) group_template.push_back(random_descriptor(config.descriptor_bits, rng));
    }
    for (std::uint32_t k = 0; k < n; ++k) {
      canonical[p].push_back(flip_bits(group_template[k], config.appearance_group_noise, rng));
      keypoints[p].push_back(random_keypoint());
    }
    ImageRecord image{place_id(p, 0), canonical[p], {}, ImageRole::reference};
    for (const auto& k : keypoints[p]) image.cue_values.push_back(cue_row(k));
    dataset.images.push_back(std::move(image));
  }

  for (std::uint32_t visit = 1; visit <= config.revisits_per_place; ++visit) {
    for (std::uint32_t p = 0; p < config.place_count; ++p) {
      ImageRecord image{place_id(p, visit), {}, {}, ImageRole::query};
      for (std::uint32_t k = 0; k < n; ++k) {
        if (config.feature_persistence < 1.0 && !persists(rng)) {
          image.descriptors.push_back(random_descriptor(config.descriptor_bits, rng));
          image.cue_values.push_back(cue_row(random_keypoint()));
          continue;
        }
        image.descriptors.push_back(flip_bits(canonical[p][k], config.bit_flip_probability, rng));
        Keypoint kp = keypoints[p][k];
        if (jitter) {
          kp.u = clamp_pixel(static_cast<double>(kp.u) + noise(rng), config.image_width);
          kp.v = clamp_pixel(static_cast<double>(kp.v) + noise(rng), config.image_height);
        }
        if (flip_label(rng)) {
          const auto other = pick_other_label(rng);
          kp.label = other >= kp.label ? other + 1 : other;
        }
        image.cue_values.push_back(cue_row(kp));
      }
      dataset.images.push_back(std::move(image));
    }
  }

  for (std::uint32_t p = 0; p < config.place_count; ++p) {
    for (std::uint32_t a = 0; a <= config.revisits_per_place; ++a) {
      auto& relevant = dataset.ground_truth.relevant[place_id(p, a)];
      for (std::uint32_t b = 0; b <= config.revisits_per_place; ++b) {
        if (a != b) relevant.insert(place_id(p, b));
      }
    }
  }
  return dataset;
}

namespace detail {

Json synthetic_to_json_value(const SyntheticConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["place_count"] = c.place_count;
  j["revisits_per_place"] = c.revisits_per_place;
  j["descriptors_per_image"] = c.descriptors_per_image;
  j["descriptor_bits"] = c.descriptor_bits;
  j["bit_flip_probability"] = c.bit_flip_probability;
  j["keypoint_noise_sigma"] = c.keypoint_noise_sigma;
  j["image_width"] = c.image_width;
  j["image_height"] = c.image_height;
  j["label_count"] = c.label_count;
  j["label_flip_probability"] = c.label_flip_probability;
  j["distractor_image_count"] = c.distractor_image_count;
  j["appearance_group_size"] = c.appearance_group_size;
  j["appearance_group_noise"] = c.appearance_group_noise;
  j["feature_persistence"] = c.feature_persistence;
  return j;
}

SyntheticConfig synthetic_from_json_value(const Json& j, const std::string& path) {
  if (!j.is_object()) throw std::invalid_argument(path + ": expected an object");
  SyntheticConfig c;
  const auto u64 = [&](const char* key, std::uint64_t& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_unsigned()) throw std::invalid_argument(path + "." + key + ": expected an unsigned integer");
    out = j[key].get<std::uint64_t>();
  };
  const auto u32 = [&](const char* key, std::uint32_t& out) {
    std::uint64_t v = out;
    u64(key, v);
    if (v > 0xffffffffULL) throw std::invalid_argument(path + "." + key + ": out of range");
    out = static_cast<std::uint32_t>(v);
  };
  const auto real = [&](const char* key, double& out) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw std::invalid_argument(path + "." + key + ": expected a number");
    out = j[key].get<double>();
  };
  for (const auto& [key, value] : j.items()) {
    static const char* const kKnown[] = {"seed",
                                         "place_count",
                                         "revisits_per_place",
                                         "descriptors_per_image",
                                         "descriptor_bits",
                                         "bit_flip_probability",
                                         "keypoint_noise_sigma",
                                         "image_width",
                                         "image_height",
                                         "label_count",
                                         "label_flip_probability",
                                         "distractor_image_count",
                                         "appearance_group_size",
                                         "appearance_group_noise",
                                         "feature_persistence"};
    bool known = false;
    for (const char* k : kKnown) known = known || key == k;
    if (!known) throw std::invalid_argument(path + "." + key + ": unknown field");
  }
  u64("seed", c.seed);
  u32("place_count", c.place_count);
  u32("revisits_per_place", c.revisits_per_place);
  u32("descriptors_per_image", c.descriptors_per_image);
  u32("descriptor_bits", c.descriptor_bits);
  real("bit_flip_probability", c.bit_flip_probability);
  real("keypoint_noise_sigma", c.keypoint_noise_sigma);
  u32("image_width", c.image_width);
  u32("image_height", c.image_height);
  u32("label_count", c.label_count);
  real("label_flip_probability", c.label_flip_probability);
  u32("distractor_image_count", c.distractor_image_count);
  u32("appearance_group_size", c.appearance_group_size);
  real("appearance_group_noise", c.appearance_group_noise);
  real("feature_persistence", c.feature_persistence);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path + "." + e.what());
  }
  return c;
}

}  // namespace detail

std::string synthetic_config_to_json(const SyntheticConfig& config) {
  return detail::synthetic_to_json_value(config).dump();
}

SyntheticConfig synthetic_config_from_json(const std::string& text) {
  detail::Json j;
  try {
    j = detail::Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(e.what());
  }
  return detail::synthetic_from_json_value(j, "synthetic");
}

}  // namespace cuedesc
