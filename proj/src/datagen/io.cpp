// Copyright 2026 The Aladin Authors
// SPDX-License-Identifier: Apache-2.0

#include "aladin/datagen/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "aladin/core/errors.hpp"

namespace aladin {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw FormatError("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  throw FormatError("manifest: unknown split '" + s + "'");
}

Figure parse_shape(const std::string& s) {
  for (int k = 0; k < 4; ++k) {
    if (shape_name(Figure(k)) == s) return Figure(k);
  }
  throw FormatError("manifest: unknown shape '" + s + "'");
}

}  // namespace

void write_png(const std::string& path, const Tensor<float>& image) {
  if (image.rank() != 3 || image.dim(0) != 3) throw DimensionError("write_png: image must be [3, H, W]");
  const std::size_t h = image.dim(1), w = image.dim(2);
  File f(std::fopen(path.c_str(), "wb"));
  if (!f) throw FormatError("cannot open " + path + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw FormatError("libpng initialisation failed");
  }
  std::vector<png_byte> rows(h * w * 3);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        const float v = std::clamp(image[(c * h + y) * w + x], 0.0f, 1.0f);
        rows[(y * w + x) * 3 + c] = static_cast<png_byte>(std::lround(v * 255.0f));
      }
    }
  }
  std::vector<png_bytep> ptrs(h);
  for (std::size_t y = 0; y < h; ++y) ptrs[y] = rows.data() + y * w * 3;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw FormatError("libpng failed writing " + path);
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, png_uint_32(w), png_uint_32(h), 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Tensor<float> read_png(const std::string& path) {
  File f(std::fopen(path.c_str(), "rb"));
  if (!f) throw FormatError("cannot open " + path);
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8)) {
    throw FormatError(path + " is not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw FormatError("libpng initialisation failed");
  }
  std::vector<png_byte> rows;
  std::vector<png_bytep> ptrs;
  png_uint_32 w = 0, h = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("corrupt PNG " + path);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (depth < 8 && color == PNG_COLOR_TYPE_GRAY) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  rows.resize(std::size_t(h) * w * 3);
  ptrs.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) ptrs[y] = rows.data() + std::size_t(y) * w * 3;
  png_read_image(png, ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Tensor<float> img({3, h, w});
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        img[(c * h + y) * w + x] = float(rows[(y * w + x) * 3 + c]) / 255.0f;
      }
    }
  }
  return img;
}

nlohmann::json corpus_manifest(const Corpus& c) {
  nlohmann::json styles = nlohmann::json::array();
  for (std::size_t s = 0; s < c.styles.size(); ++s) {
    styles.push_back({{"id", s},
                      {"fingerprint", c.styles[s].fingerprint()},
                      {"split", split_name(c.group_split[s])},
                      {"params", c.styles[s].to_json()}});
  }
  nlohmann::json images = nlohmann::json::array();
  for (const auto& r : c.records) {
    images.push_back({{"file", r.file},
                      {"style_id", r.style_id},
                      {"fingerprint", c.styles[std::size_t(r.style_id)].fingerprint()},
                      {"semantic", r.semantic},
                      {"raw_group", r.raw_group},
                      {"cleaned_group", r.cleaned_group},
                      {"split", split_name(r.split)},
                      {"content", r.content.to_json()}});
  }
  nlohmann::json parts = nlohmann::json::object();
  for (const auto& [name, groups] : c.partitions) {
    auto tag = c.partition_tags.count(name) ? c.partition_tags.at(name) : nlohmann::json::object();
    parts[name] = {{"tag", tag}, {"groups", groups}};
  }
  return {{"format", "aladin-corpus-1"},
          {"seed", c.seed},
          {"config", c.config.to_json()},
          {"size", c.config.size},
          {"styles", styles},
          {"images", images},
          {"partitions", parts}};
}

void save_manifest(const std::string& dir, const Corpus& corpus) {
  write_text(fs::path(dir) / "manifest.json", corpus_manifest(corpus).dump(1) + "\n");
}

void save_corpus(const std::string& dir, const Corpus& corpus) {
  fs::create_directories(fs::path(dir) / "images");
  for (std::size_t i = 0; i < corpus.records.size(); ++i) {
    write_png((fs::path(dir) / corpus.records[i].file).string(), row(corpus.images, i));
  }
  save_manifest(dir, corpus);
}

Corpus load_corpus(const std::string& dir) {
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(read_text(fs::path(dir) / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest.json: ") + e.what());
  }
  if (m.value("format", "") != "aladin-corpus-1") throw FormatError("manifest.json: unknown format");
  Corpus c;
  try {
    c.config = DatagenConfig::from_json(m.at("config"));
    c.seed = m.at("seed").get<std::uint64_t>();
    for (const auto& s : m.at("styles")) {
      c.styles.push_back(StyleParams::from_json(s.at("params")));
      c.group_split.push_back(parse_split(s.at("split").get<std::string>()));
      if (c.styles.back().fingerprint() != s.at("fingerprint").get<std::string>()) {
        throw FormatError("manifest.json: style fingerprint mismatch");
      }
    }
    std::vector<Tensor<float>> imgs;
    for (const auto& j : m.at("images")) {
      ImageRecord r;
      r.file = j.at("file").get<std::string>();
      r.style_id = j.at("style_id").get<int>();
      r.semantic = j.at("semantic").get<int>();
      r.raw_group = j.at("raw_group").get<int>();
      r.cleaned_group = j.at("cleaned_group").get<int>();
      r.split = parse_split(j.at("split").get<std::string>());
      const auto& ct = j.at("content");
      for (const auto& s : ct.at("shapes")) r.content.shape_set.push_back(parse_shape(s.get<std::string>()));
      r.content.layout_seed = ct.at("layout_seed").get<std::uint64_t>();
      r.content.object_count = ct.at("object_count").get<int>();
      if (r.style_id < 0 || std::size_t(r.style_id) >= c.styles.size()) {
        throw FormatError("manifest.json: style id out of range");
      }
      imgs.push_back(read_png((fs::path(dir) / r.file).string()));
      c.records.push_back(std::move(r));
    }
    if (!imgs.empty()) c.images = stack<float>(imgs);
    for (const auto& [name, p] : m.at("partitions").items()) {
      c.partitions[name] = p.at("groups").get<std::vector<std::vector<std::size_t>>>();
      c.partition_tags[name] = p.at("tag");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("manifest.json: ") + e.what());
  }
  return c;
}

}  // namespace aladin
