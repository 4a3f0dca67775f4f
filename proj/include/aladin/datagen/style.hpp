// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "aladin/autodiff/tensor.hpp"
#include "aladin/core/rng.hpp"
#include "json.hpp"

namespace aladin {

enum class TextureKind { Hatch, Stipple, Wash };
enum class Figure { Circle, Triangle, Rectangle, Star };

constexpr std::size_t kSwatchCount = 16;
constexpr int kMinStroke = 1, kMaxStroke = 4;
constexpr int kMinFrequency = 3, kMaxFrequency = 12;
constexpr int kToneLevels = 9;   // background 0.1, 0.2, ..., 0.9
constexpr int kNoiseLevels = 5;  // noise amplitude 0.0, 0.03, ..., 0.12

// Fixed RGB swatch table the palette indexes into.
std::array<float, 3> swatch_color(std::size_t index);

/// Every field is quantized, so style identity is exact equality.
struct StyleParams {
  std::array<std::uint8_t, 3> palette{0, 1, 2};  // distinct swatch indices
  int stroke_width = 1;                          // pixels at 64 px
  int texture_frequency = kMinFrequency;         // cycles per image
  TextureKind texture_kind = TextureKind::Hatch;
  int background_tone = 4;  // level in [0, kToneLevels)
  int noise_level = 0;      // level in [0, kNoiseLevels)

  double background_value() const { return 0.1 * (background_tone + 1); }
  double noise_amplitude() const { return 0.03 * noise_level; }

  bool operator==(const StyleParams&) const = default;
  void validate() const;
  // Number of the six fields in which two styles differ.
  std::size_t fields_differing(const StyleParams& other) const;
  // FNV-1a over the canonical field encoding, as 16 hex digits.
  std::string fingerprint() const;

  nlohmann::json to_json() const;
  static StyleParams from_json(const nlohmann::json& j);
};

struct ContentParams {
  std::vector<Figure> shape_set;  // shapes objects are drawn from
  std::uint64_t layout_seed = 0;
  int object_count = 1;  // 0 renders the textured background alone

  nlohmann::json to_json() const;
};

std::string texture_kind_name(TextureKind k);
std::string shape_name(Figure s);

StyleParams gen_style(Rng& rng);

// A style differing from `base` in exactly `fields` randomly chosen fields.
StyleParams mutate_style(const StyleParams& base, std::size_t fields, Rng& rng);

/// Keeps the styles drawn so far and redraws candidates that would differ
/// from any of them in fewer than two fields.
class StyleSampler {
 public:
  explicit StyleSampler(std::size_t max_attempts = 10000) : max_attempts_(max_attempts) {}
  StyleParams draw(Rng& rng);
  // Variant of `base`; falls back to fresh draws when the variants are
  // exhausted.
  StyleParams draw_near(const StyleParams& base, std::size_t fields, Rng& rng);
  // Registers an externally given style; throws DataError on conflicts.
  void accept(const StyleParams& s);
  const std::vector<StyleParams>& styles() const { return styles_; }

 private:
  bool admissible(const StyleParams& s) const;
  std::size_t max_attempts_;
  std::vector<StyleParams> styles_;
};

ContentParams gen_content(Rng& rng);

// Pure function of its arguments; values in [0, 1].
Tensor<float> render(const ContentParams& content, const StyleParams& style, std::size_t size);

}  // namespace aladin
