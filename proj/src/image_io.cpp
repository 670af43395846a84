// Copyright 2026 The xwalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "xwalk/image_io.hpp"

#include <png.h>
#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "xwalk/errors.hpp"

namespace xwalk {

namespace {

struct DecodedPng {
  int width = 0;
  int height = 0;
  int channels = 0;
  int depth = 0;
  std::vector<std::uint8_t> pixels;  // big-endian for 16-bit
};

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_from_cursor(png_structp png, png_bytep out, png_size_t n) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + n > cur->bytes.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, cur->bytes.data() + cur->pos, n);
  cur->pos += n;
}

void png_append(png_structp png, png_bytep data, png_size_t n) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

void png_warning_silent(png_structp, png_const_charp) {}

// libpng reports errors by longjmp; no C++ objects are created between the
// setjmp and the libpng calls below.
bool decode_png_raw(std::span<const std::uint8_t> bytes, DecodedPng& out, std::string& error) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_silent);
  if (png == nullptr) {
    error = "png_create_read_struct failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  ReadCursor cursor{bytes, 0};
  std::vector<png_bytep> rows;
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    error = "corrupt PNG data";
    return false;
  }
  png_set_read_fn(png, &cursor, png_read_from_cursor);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  out.pixels.resize(stride * out.height);
  rows.resize(out.height);
  for (int y = 0; y < out.height; ++y) rows[y] = out.pixels.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool encode_png_raw(const std::uint8_t* pixels, int width, int height, int channels, int depth,
                    std::vector<std::uint8_t>& out, std::string& error) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_warning_silent);
  if (png == nullptr) {
    error = "png_create_write_struct failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(height);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    error = "PNG encoding failed";
    return false;
  }
  int color_type = PNG_COLOR_TYPE_RGB;
  switch (channels) {
    case 1: color_type = PNG_COLOR_TYPE_GRAY; break;
    case 2: color_type = PNG_COLOR_TYPE_GRAY_ALPHA; break;
    case 3: color_type = PNG_COLOR_TYPE_RGB; break;
    default: color_type = PNG_COLOR_TYPE_RGB_ALPHA; break;
  }
  png_set_write_fn(png, &out, png_append, png_flush_noop);
  png_set_IHDR(png, info, width, height, depth, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels * (depth / 8);
  for (int y = 0; y < height; ++y) rows[y] = const_cast<std::uint8_t*>(pixels) + stride * y;
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

Raster raster_from_decoded(const DecodedPng& d) {
  // Gray and gray+alpha are promoted to RGB(A).
  const bool gray = d.channels <= 2;
  const bool alpha = d.channels == 2 || d.channels == 4;
  const int out_channels = alpha ? 4 : 3;
  const double scale = d.depth == 16 ? 65535.0 : 255.0;
  Raster r(d.width, d.height, out_channels);
  const std::size_t bps = d.depth == 16 ? 2 : 1;
  for (int y = 0; y < d.height; ++y) {
    for (int x = 0; x < d.width; ++x) {
      auto sample = [&](int c) {
        const std::size_t off = ((static_cast<std::size_t>(y) * d.width + x) * d.channels + c) * bps;
        const unsigned v = bps == 2 ? (d.pixels[off] << 8) | d.pixels[off + 1] : d.pixels[off];
        return v / scale;
      };
      if (gray) {
        const double g = sample(0);
        for (int c = 0; c < 3; ++c) r.at(x, y, c) = g;
        if (alpha) r.at(x, y, 3) = sample(1);
      } else {
        for (int c = 0; c < out_channels; ++c) r.at(x, y, c) = sample(c);
      }
    }
  }
  return r;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

bool is_png(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

Raster decode_ppm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  auto next_token = [&]() -> long {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    long value = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1 << 20) throw FormatError("PPM header value out of range");
      ++pos;
      any = true;
    }
    if (!any) throw FormatError("malformed PPM header");
    return value;
  };
  const long w = next_token();
  const long h = next_token();
  const long maxval = next_token();
  if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) throw FormatError("invalid PPM header");
  ++pos;  // single whitespace before raster
  const std::size_t bps = maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(w) * h * 3 * bps;
  if (pos + need > bytes.size()) throw FormatError("truncated PPM raster");
  Raster r(static_cast<int>(w), static_cast<int>(h), 3);
  auto data = r.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::size_t off = pos + i * bps;
    const unsigned v = bps == 2 ? (bytes[off] << 8) | bytes[off + 1] : bytes[off];
    data[i] = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return r;
}

std::vector<std::uint8_t> encode_ppm(const Raster& r) {
  if (r.channels() != 3) throw FormatError("PPM output requires an RGB raster");
  std::ostringstream header;
  header << "P6\n" << r.width() << ' ' << r.height() << "\n255\n";
  const std::string h = header.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  for (double v : r.data()) out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  return out;
}

std::vector<std::uint8_t> to_bytes8(const Raster& r) {
  std::vector<std::uint8_t> px(r.size());
  auto data = r.data();
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = static_cast<std::uint8_t>(std::lround(std::clamp(data[i], 0.0, 1.0) * 255.0));
  }
  return px;
}

std::vector<std::uint8_t> encode_or_throw(const std::uint8_t* px, const Raster& r, int depth) {
  std::vector<std::uint8_t> out;
  std::string error;
  if (!encode_png_raw(px, r.width(), r.height(), r.channels(), depth, out, error)) throw FormatError(error);
  return out;
}

}  // namespace

Raster decode_png(std::span<const std::uint8_t> bytes) {
  if (!is_png(bytes)) throw FormatError("not a PNG stream");
  DecodedPng d;
  std::string error;
  if (!decode_png_raw(bytes, d, error)) throw FormatError(error);
  return raster_from_decoded(d);
}

std::vector<std::uint8_t> encode_png(const Raster& r) {
  const auto px = to_bytes8(r);
  return encode_or_throw(px.data(), r, 8);
}

Raster load_image(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  if (is_png(bytes)) return decode_png(bytes);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes);
  throw FormatError("unsupported image format: " + path.string());
}

void save_image(const Raster& r, const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (ext == ".ppm") {
    write_file(path, encode_ppm(r));
  } else {
    write_file(path, encode_png(r));
  }
}

BinaryMask load_mask(const std::filesystem::path& path) { return mask_from_raster(load_image(path)); }

void save_mask(const BinaryMask& m, const std::filesystem::path& path) {
  Raster r(m.width(), m.height(), 1);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) r.at(x, y, 0) = m.get(x, y) ? 1.0 : 0.0;
  write_file(path, encode_png(r));
}

void save_png16(const Raster& r, const std::filesystem::path& path) {
  std::vector<std::uint8_t> px(r.size() * 2);
  auto data = r.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto v = static_cast<unsigned>(std::lround(std::clamp(data[i], 0.0, 1.0) * 65535.0));
    px[2 * i] = static_cast<std::uint8_t>(v >> 8);
    px[2 * i + 1] = static_cast<std::uint8_t>(v & 0xff);
  }
  write_file(path, encode_or_throw(px.data(), r, 16));
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw FormatError("base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out(3 * text.size() / 4);
  const int n = EVP_DecodeBlock(out.data(), reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw FormatError("invalid base64 payload");
  std::size_t pad = 0;
  if (!text.empty() && text.back() == '=') ++pad;
  if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
  out.resize(static_cast<std::size_t>(n) - pad);
  return out;
}

}  // namespace xwalk
