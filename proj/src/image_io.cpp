#include "veinmatch/image_io.hpp"

#include <png.h>
// jpeglib.h needs FILE and size_t declared first.
#include <cstdio>
#include <jpeglib.h>

#include <csetjmp>

#include <cctype>
#include <fstream>
#include <memory>
#include <string>

#include "veinmatch/error.hpp"

namespace veinmatch {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) Fail(ErrorKind::kIo, "cannot open " + path.string());
  return f;
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext;
}

// Decodes any PNG into 8-bit RGB.
RgbImage decode_png(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    Fail(ErrorKind::kIo, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    Fail(ErrorKind::kIo, "corrupt PNG: " + path.string());
  }
  png_init_io(png, f.get());
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_packing(png);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  png_read_update_info(png, info);

  RgbImage img(static_cast<int>(png_get_image_width(png, info)),
               static_cast<int>(png_get_image_height(png, info)));
  std::vector<png_bytep> rows(img.height);
  for (int y = 0; y < img.height; ++y) rows[y] = img.px(0, y);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void encode_png(const std::filesystem::path& path, int width, int height,
                int color_type, const std::vector<std::uint8_t>& data,
                int channels) {
  FilePtr f = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    Fail(ErrorKind::kIo, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    Fail(ErrorKind::kIo, "failed writing PNG: " + path.string());
  }
  png_init_io(png, f.get());
  png_set_IHDR(png, info, width, height, 8, color_type, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(&data[static_cast<std::size_t>(y) * width * channels]));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Skips whitespace and '#' comments in a PNM header.
int read_pnm_int(std::istream& in) {
  int c = in.peek();
  while (c != EOF) {
    if (std::isspace(c)) {
      in.get();
    } else if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else {
      break;
    }
    c = in.peek();
  }
  int v = -1;
  if (!(in >> v)) Fail(ErrorKind::kIo, "malformed PGM header");
  return v;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorKind::kIo, "cannot open " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '5') Fail(ErrorKind::kIo, "not a binary PGM: " + path.string());
  const int w = read_pnm_int(in);
  const int h = read_pnm_int(in);
  const int maxval = read_pnm_int(in);
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    Fail(ErrorKind::kIo, "unsupported PGM header in " + path.string());
  }
  in.get();  // single whitespace before the raster
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    Fail(ErrorKind::kIo, "truncated PGM raster in " + path.string());
  }
  GrayImage img(w, h);
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    const int v = bytes == 1 ? raw[i] : (raw[2 * i] << 8) | raw[2 * i + 1];
    // Quantize to 8 bits so PGM and PNG inputs share one intensity lattice.
    px[i] = quantize_level(static_cast<double>(v) / maxval) / 255.0;
  }
  return img;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void on_jpeg_error(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, mgr->message);
  std::longjmp(mgr->jump, 1);
}

GrayImage decode_jpeg(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  jpeg_decompress_struct cinfo{};
  JpegErrorManager err{};
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = on_jpeg_error;
  std::vector<std::uint8_t> pixels;
  int width = 0;
  int height = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    Fail(ErrorKind::kIo, "cannot decode JPEG " + path.string() + ": " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_GRAYSCALE;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  pixels.resize(static_cast<std::size_t>(width) * height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = &pixels[static_cast<std::size_t>(cinfo.output_scanline) * width];
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);

  GrayImage img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) img.at(x, y) = pixels[static_cast<std::size_t>(y) * width + x] / 255.0;
  }
  return img;
}

}  // namespace

GrayImage read_image(const std::filesystem::path& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) Fail(ErrorKind::kIo, "cannot open " + path.string());
  unsigned char sig[8] = {};
  probe.read(reinterpret_cast<char*>(sig), 8);
  probe.close();
  if (sig[0] == 'P' && sig[1] == '5') return read_pgm(path);
  if (sig[0] == 0xFF && sig[1] == 0xD8) return decode_jpeg(path);
  if (png_sig_cmp(sig, 0, 8) != 0) {
    Fail(ErrorKind::kIo, "unsupported image format: " + path.string());
  }
  const RgbImage rgb = decode_png(path);
  GrayImage img(rgb.width, rgb.height);
  for (int y = 0; y < rgb.height; ++y) {
    for (int x = 0; x < rgb.width; ++x) {
      const std::uint8_t* p = rgb.px(x, y);
      const int sum = p[0] + p[1] + p[2];
      img.at(x, y) = quantize_level(sum / (3.0 * 255.0)) / 255.0;
    }
  }
  return img;
}

void write_image(const std::filesystem::path& path, const GrayImage& img) {
  std::vector<std::uint8_t> bytes(img.size());
  const auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) bytes[i] = static_cast<std::uint8_t>(quantize_level(px[i]));

  const std::string ext = lower_extension(path);
  if (ext == ".pgm") {
    std::ofstream out(path, std::ios::binary);
    if (!out) Fail(ErrorKind::kIo, "cannot write " + path.string());
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) Fail(ErrorKind::kIo, "failed writing " + path.string());
  } else if (ext == ".png") {
    encode_png(path, img.width(), img.height(), PNG_COLOR_TYPE_GRAY, bytes, 1);
  } else {
    Fail(ErrorKind::kIo, "unsupported output extension '" + ext + "'");
  }
}

void write_png(const std::filesystem::path& path, const RgbImage& img) {
  encode_png(path, img.width, img.height, PNG_COLOR_TYPE_RGB, img.data, 3);
}

RgbImage read_png_rgb(const std::filesystem::path& path) { return decode_png(path); }

}  // namespace veinmatch
