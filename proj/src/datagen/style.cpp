// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/datagen/style.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "aladin/core/errors.hpp"

namespace aladin {

namespace {

// Muted, evenly spread hues with a few neutrals.
constexpr float kSwatches[kSwatchCount][3] = {
    {0.80f, 0.25f, 0.20f}, {0.85f, 0.55f, 0.20f}, {0.85f, 0.80f, 0.30f}, {0.45f, 0.70f, 0.25f},
    {0.20f, 0.55f, 0.35f}, {0.20f, 0.60f, 0.65f}, {0.25f, 0.40f, 0.75f}, {0.40f, 0.30f, 0.70f},
    {0.65f, 0.30f, 0.65f}, {0.80f, 0.40f, 0.55f}, {0.55f, 0.40f, 0.30f}, {0.30f, 0.25f, 0.20f},
    {0.90f, 0.88f, 0.82f}, {0.55f, 0.55f, 0.55f}, {0.15f, 0.15f, 0.18f}, {0.60f, 0.75f, 0.85f}};

std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<std::uint8_t> encode(const StyleParams& s) {
  return {s.palette[0],
          s.palette[1],
          s.palette[2],
          static_cast<std::uint8_t>(s.stroke_width),
          static_cast<std::uint8_t>(s.texture_frequency),
          static_cast<std::uint8_t>(s.texture_kind),
          static_cast<std::uint8_t>(s.background_tone),
          static_cast<std::uint8_t>(s.noise_level)};
}

std::array<std::uint8_t, 3> draw_palette(Rng& rng) {
  auto idx = rng.sample_without_replacement(kSwatchCount, 3);
  return {static_cast<std::uint8_t>(idx[0]), static_cast<std::uint8_t>(idx[1]),
          static_cast<std::uint8_t>(idx[2])};
}

int draw_other(int current, int lo, int hi, Rng& rng) {
  int v = current;
  while (v == current) v = static_cast<int>(rng.uniform_int(lo, hi));
  return v;
}

}  // namespace

std::array<float, 3> swatch_color(std::size_t index) {
  if (index >= kSwatchCount) throw UsageError("swatch index out of range");
  return {kSwatches[index][0], kSwatches[index][1], kSwatches[index][2]};
}

std::string texture_kind_name(TextureKind k) {
  switch (k) {
    case TextureKind::Hatch: return "hatch";
    case TextureKind::Stipple: return "stipple";
    case TextureKind::Wash: return "wash";
  }
  return "?";
}

std::string shape_name(Figure s) {
  switch (s) {
    case Figure::Circle: return "circle";
    case Figure::Triangle: return "triangle";
    case Figure::Rectangle: return "rectangle";
    case Figure::Star: return "star";
  }
  return "?";
}

void StyleParams::validate() const {
  for (auto p : palette) {
    if (p >= kSwatchCount) throw DataError("palette index out of range");
  }
  if (palette[0] == palette[1] || palette[0] == palette[2] || palette[1] == palette[2]) {
    throw DataError("palette colors must be distinct");
  }
  if (stroke_width < kMinStroke || stroke_width > kMaxStroke) throw DataError("stroke_width out of range");
  if (texture_frequency < kMinFrequency || texture_frequency > kMaxFrequency) {
    throw DataError("texture_frequency out of range");
  }
  if (background_tone < 0 || background_tone >= kToneLevels) throw DataError("background_tone out of range");
  if (noise_level < 0 || noise_level >= kNoiseLevels) throw DataError("noise_level out of range");
}

std::size_t StyleParams::fields_differing(const StyleParams& o) const {
  return std::size_t(palette != o.palette) + std::size_t(stroke_width != o.stroke_width) +
         std::size_t(texture_frequency != o.texture_frequency) +
         std::size_t(texture_kind != o.texture_kind) +
         std::size_t(background_tone != o.background_tone) + std::size_t(noise_level != o.noise_level);
}

std::string StyleParams::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(encode(*this))));
  return buf;
}

nlohmann::json StyleParams::to_json() const {
  return {{"palette", {palette[0], palette[1], palette[2]}},
          {"stroke_width", stroke_width},
          {"texture_frequency", texture_frequency},
          {"texture_kind", texture_kind_name(texture_kind)},
          {"background_tone", background_tone},
          {"noise_level", noise_level}};
}

StyleParams StyleParams::from_json(const nlohmann::json& j) {
  StyleParams s;
  const auto p = j.at("palette").get<std::vector<int>>();
  if (p.size() != 3) throw DataError("palette needs three colors");
  for (int k = 0; k < 3; ++k) {
    if (p[k] < 0 || p[k] >= int(kSwatchCount)) throw DataError("palette index out of range");
    s.palette[k] = static_cast<std::uint8_t>(p[k]);
  }
  s.stroke_width = j.at("stroke_width").get<int>();
  s.texture_frequency = j.at("texture_frequency").get<int>();
  const auto kind = j.at("texture_kind").get<std::string>();
  if (kind == "hatch") {
    s.texture_kind = TextureKind::Hatch;
  } else if (kind == "stipple") {
    s.texture_kind = TextureKind::Stipple;
  } else if (kind == "wash") {
    s.texture_kind = TextureKind::Wash;
  } else {
    throw DataError("unknown texture kind '" + kind + "'");
  }
  s.background_tone = j.at("background_tone").get<int>();
  s.noise_level = j.at("noise_level").get<int>();
  s.validate();
  return s;
}

nlohmann::json ContentParams::to_json() const {
  std::vector<std::string> shapes;
  for (Figure s : shape_set) shapes.push_back(shape_name(s));
  return {{"shapes", shapes}, {"layout_seed", layout_seed}, {"object_count", object_count}};
}

StyleParams gen_style(Rng& rng) {
  StyleParams s;
  s.palette = draw_palette(rng);
  s.stroke_width = static_cast<int>(rng.uniform_int(kMinStroke, kMaxStroke));
  s.texture_frequency = static_cast<int>(rng.uniform_int(kMinFrequency, kMaxFrequency));
  s.texture_kind = static_cast<TextureKind>(rng.uniform_index(3));
  s.background_tone = static_cast<int>(rng.uniform_index(kToneLevels));
  s.noise_level = static_cast<int>(rng.uniform_index(kNoiseLevels));
  return s;
}

StyleParams mutate_style(const StyleParams& base, std::size_t fields, Rng& rng) {
  if (fields == 0 || fields > 6) throw UsageError("mutate_style: fields must be in [1, 6]");
  StyleParams s = base;
  for (std::size_t f : rng.sample_without_replacement(6, fields)) {
    switch (f) {
      case 0: {
        // Swap one palette color for an unused swatch.
        const std::size_t slot = rng.uniform_index(3);
        std::uint8_t c = s.palette[slot];
        while (c == s.palette[0] || c == s.palette[1] || c == s.palette[2]) {
          c = static_cast<std::uint8_t>(rng.uniform_index(kSwatchCount));
        }
        s.palette[slot] = c;
        break;
      }
      case 1: s.stroke_width = draw_other(s.stroke_width, kMinStroke, kMaxStroke, rng); break;
      case 2:
        s.texture_frequency = draw_other(s.texture_frequency, kMinFrequency, kMaxFrequency, rng);
        break;
      case 3:
        s.texture_kind = static_cast<TextureKind>(draw_other(int(s.texture_kind), 0, 2, rng));
        break;
      case 4: s.background_tone = draw_other(s.background_tone, 0, kToneLevels - 1, rng); break;
      case 5: s.noise_level = draw_other(s.noise_level, 0, kNoiseLevels - 1, rng); break;
    }
  }
  return s;
}

bool StyleSampler::admissible(const StyleParams& s) const {
  for (const auto& o : styles_) {
    if (s.fields_differing(o) < 2) return false;
  }
  return true;
}

StyleParams StyleSampler::draw(Rng& rng) {
  for (std::size_t a = 0; a < max_attempts_; ++a) {
    StyleParams s = gen_style(rng);
    if (admissible(s)) {
      styles_.push_back(s);
      return s;
    }
  }
  throw DataError("StyleSampler: style space exhausted");
}

StyleParams StyleSampler::draw_near(const StyleParams& base, std::size_t fields, Rng& rng) {
  for (std::size_t a = 0; a < 200; ++a) {
    StyleParams s = mutate_style(base, fields, rng);
    if (admissible(s)) {
      styles_.push_back(s);
      return s;
    }
  }
  return draw(rng);
}

void StyleSampler::accept(const StyleParams& s) {
  if (!admissible(s)) throw DataError("style " + s.fingerprint() + " is too close to an existing one");
  styles_.push_back(s);
}

ContentParams gen_content(Rng& rng) {
  ContentParams c;
  c.shape_set = {static_cast<Figure>(rng.uniform_index(4))};
  c.layout_seed = rng.next_u64();
  c.object_count = static_cast<int>(rng.uniform_int(1, 5));
  return c;
}

namespace {

struct Object {
  Figure shape;
  double cx, cy, radius, angle;
  std::array<double, 3> fill;
};

bool inside_polygon(double x, double y, const std::vector<std::pair<double, double>>& poly) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto [xi, yi] = poly[i];
    const auto [xj, yj] = poly[j];
    if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) in = !in;
  }
  return in;
}

std::vector<std::pair<double, double>> regular_star(int points, double inner) {
  std::vector<std::pair<double, double>> poly;
  const int n = inner > 0 ? 2 * points : points;
  for (int k = 0; k < n; ++k) {
    const double r = (inner > 0 && k % 2) ? inner : 1.0;
    const double a = std::numbers::pi / 2 + 2 * std::numbers::pi * k / n;
    poly.emplace_back(r * std::cos(a), r * std::sin(a));
  }
  return poly;
}

// Point in the unit shape, local coordinates.
bool inside_shape(Figure s, double x, double y) {
  static const auto triangle = regular_star(3, 0);
  static const auto star = regular_star(5, 0.45);
  switch (s) {
    case Figure::Circle: return x * x + y * y <= 1.0;
    case Figure::Rectangle: return std::abs(x) <= 1.0 && std::abs(y) <= 0.7;
    case Figure::Triangle: return inside_polygon(x, y, triangle);
    case Figure::Star: return inside_polygon(x, y, star);
  }
  return false;
}

bool inside_object(const Object& o, double u, double v, double shrink) {
  const double r = o.radius - shrink;
  if (r <= 0) return false;
  const double dx = u - o.cx, dy = v - o.cy;
  const double c = std::cos(o.angle), s = std::sin(o.angle);
  return inside_shape(o.shape, (c * dx + s * dy) / r, (-s * dx + c * dy) / r);
}

double frac(double x) { return x - std::floor(x); }

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

Tensor<float> render(const ContentParams& content, const StyleParams& style, std::size_t size) {
  style.validate();
  if (size < 8) throw UsageError("render: size must be >= 8");
  if (content.object_count < 0) throw UsageError("render: negative object count");
  if (content.object_count > 0 && content.shape_set.empty()) {
    throw UsageError("render: objects need a non-empty shape set");
  }
  const double px = 1.0 / double(size);
  const double stroke = std::max(1.0, std::round(style.stroke_width * double(size) / 64.0)) * px;
  const double freq = style.texture_frequency;

  const auto c0 = swatch_color(style.palette[0]);
  const auto c1 = swatch_color(style.palette[1]);
  const auto c2 = swatch_color(style.palette[2]);
  Rng layout(content.layout_seed);
  std::vector<Object> objects;
  for (int k = 0; k < content.object_count; ++k) {
    Object o;
    o.shape = content.shape_set[layout.uniform_index(content.shape_set.size())];
    o.radius = layout.uniform(0.18, 0.38);
    o.cx = layout.uniform(0.2, 0.8);
    o.cy = layout.uniform(0.2, 0.8);
    o.angle = layout.uniform(0.0, 2 * std::numbers::pi);
    // Fill colors belong to the content; the style only tints them.
    const auto& tint = k % 2 ? c1 : c0;
    for (int ch = 0; ch < 3; ++ch) o.fill[ch] = 0.7 * layout.uniform() + 0.3 * tint[ch];
    objects.push_back(o);
  }
  const double phase_u = layout.uniform(), phase_v = layout.uniform();
  // Exposure and white balance differ from picture to picture regardless of style.
  const double exposure = layout.uniform(0.8, 1.2);
  std::array<double, 3> cast{};
  for (double& g : cast) g = exposure * layout.uniform(0.85, 1.15);
  const float bg = static_cast<float>(style.background_value());

  Tensor<float> img({3, size, size});
  const std::size_t plane = size * size;
  Rng noise(mix(content.layout_seed, std::stoull(style.fingerprint(), nullptr, 16)));
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double u = (x + 0.5) * px, v = (y + 0.5) * px;
      std::array<double, 3> rgb{bg, bg, bg};
      // Later objects paint over earlier ones.
      for (const Object& o : objects) {
        if (!inside_object(o, u, v, 0)) continue;
        const bool edge = !inside_object(o, u, v, stroke);
        for (int c = 0; c < 3; ++c) rgb[c] = edge ? 0.35 * o.fill[c] : o.fill[c];
      }

      double alpha = 0;
      switch (style.texture_kind) {
        case TextureKind::Hatch: {
          // Diagonal lines `freq` times across the image.
          const double t = frac((u + v) * freq * 0.5 + phase_u);
          const double dist = std::min(t, 1 - t) / (freq * 0.5) / std::numbers::sqrt2;
          alpha = dist < stroke * 0.5 ? 0.75 : 0.0;
          break;
        }
        case TextureKind::Stipple: {
          const double gu = u * freq + phase_u, gv = v * freq + phase_v;
          const double du = (frac(gu) - 0.5) / freq, dv = (frac(gv) - 0.5) / freq;
          const double r = 0.75 * stroke + 0.5 * px;
          alpha = du * du + dv * dv < r * r ? 0.85 : 0.0;
          break;
        }
        case TextureKind::Wash: {
          const double w = 0.5 + 0.5 * std::sin(2 * std::numbers::pi * (u * freq * 0.5 + phase_u)) *
                                     std::cos(2 * std::numbers::pi * (v * freq * 0.25 + phase_v));
          alpha = 0.45 * w;
          break;
        }
      }
      const double n = style.noise_amplitude() * (2 * noise.uniform() - 1);
      for (int c = 0; c < 3; ++c) {
        const double val = cast[c] * ((1 - alpha) * rgb[c] + alpha * c2[c]) + n;
        img[c * plane + y * size + x] = static_cast<float>(std::clamp(val, 0.0, 1.0));
      }
    }
  }
  return img;
}

}  // namespace aladin
