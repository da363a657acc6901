#include <png.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

#include "flowfem/imaging.hpp"

namespace flowfem {

namespace {

[[noreturn]] void fail(const std::string& op, const std::string& msg) {
  throw std::runtime_error("imaging." + op + ": " + msg);
}

int read_pnm_int(std::istream& in) {
  // skips whitespace and '#' comments
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) fail("load_image", "malformed PGM header");
  int val = 0;
  while (c != EOF && std::isdigit(c)) {
    val = val * 10 + (c - '0');
    c = in.get();
  }
  return val;
}

Image load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[2];
  in.read(magic, 2);
  if (!in || magic[0] != 'P' || magic[1] != '5')
    fail("load_image", "not a binary PGM: " + path);
  const int w = read_pnm_int(in);
  const int h = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
    fail("load_image", "bad PGM dimensions in " + path);

  Image img(w, h);
  const size_t n = img.size();
  if (maxval < 256) {
    std::vector<unsigned char> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), n);
    if (!in) fail("load_image", "truncated PGM data in " + path);
    for (size_t i = 0; i < n; ++i) img.data[i] = buf[i] / double(maxval);
  } else {
    std::vector<unsigned char> buf(2 * n);
    in.read(reinterpret_cast<char*>(buf.data()), 2 * n);
    if (!in) fail("load_image", "truncated PGM data in " + path);
    for (size_t i = 0; i < n; ++i) {
      const unsigned v = (unsigned(buf[2 * i]) << 8) | buf[2 * i + 1];  // big-endian
      img.data[i] = v / double(maxval);
    }
  }
  return img;
}

struct FileCloser {
  void operator()(FILE* f) const { if (f) std::fclose(f); }
};

Image load_png(const std::string& path) {
  std::unique_ptr<FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail("load_image", "cannot open " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) fail("load_image", "libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("load_image", "libpng error reading " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  int depth = png_get_bit_depth(png, info);

  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (depth == 16) png_set_swap(png);  // to host little-endian
  png_read_update_info(png, info);

  depth = png_get_bit_depth(png, info);
  const int channels = png_get_channels(png, info);
  const size_t rowbytes = png_get_rowbytes(png, info);
  std::vector<unsigned char> pixels(rowbytes * h);
  std::vector<png_bytep> rows(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image img(static_cast<int>(w), static_cast<int>(h));
  const double scale = depth == 16 ? 65535.0 : 255.0;
  for (png_uint_32 y = 0; y < h; ++y) {
    for (png_uint_32 x = 0; x < w; ++x) {
      double v;
      if (channels >= 3) {
        double rgb[3];
        for (int c = 0; c < 3; ++c) {
          const size_t idx = (static_cast<size_t>(x) * channels + c);
          rgb[c] = depth == 16
                       ? reinterpret_cast<const uint16_t*>(rows[y])[idx] / scale
                       : rows[y][idx] / scale;
        }
        v = 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2];
      } else {
        v = depth == 16 ? reinterpret_cast<const uint16_t*>(rows[y])[x] / scale
                        : rows[y][x] / scale;
      }
      img.at(static_cast<int>(x), static_cast<int>(y)) = v;
    }
  }
  return img;
}

}  // namespace

Image load_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) fail("load_image", "cannot open " + path);
  unsigned char sig[2] = {0, 0};
  probe.read(reinterpret_cast<char*>(sig), 2);
  probe.close();
  if (sig[0] == 'P' && sig[1] == '5') return load_pgm(path);
  if (sig[0] == 0x89 && sig[1] == 'P') return load_png(path);
  fail("load_image", "unrecognized format (want PGM P5 or PNG): " + path);
}

void save_pgm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("save_pgm", "cannot open " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> buf(img.size());
  for (size_t i = 0; i < img.size(); ++i) {
    double v = img.data[i];
    v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    buf[i] = static_cast<unsigned char>(v * 255.0 + 0.5);
  }
  out.write(reinterpret_cast<const char*>(buf.data()), buf.size());
  if (!out) fail("save_pgm", "write failed for " + path);
}

void save_png_rgb(const std::string& path, const RgbImage& img) {
  std::unique_ptr<FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail("save_png_rgb", "cannot open " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) fail("save_png_rgb", "libpng init failed");
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail("save_png_rgb", "libpng error writing " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(img.px(0, y)));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace flowfem
