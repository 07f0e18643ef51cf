#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <vector>

#include <png.h>

#include "saca/image.hpp"

namespace saca {

namespace {

std::string lower_extension(std::filesystem::path const &path)
{
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

std::string_view trim(std::string_view s)
{
  auto const ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

PlaneXd read_csv(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view const body = trim(line);
    if (body.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= body.size()) {
      std::size_t const comma = body.find(',', start);
      std::string_view const cell = trim(body.substr(start, comma == std::string_view::npos ? body.npos : comma - start));
      double v = 0.0;
      auto const [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty())
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": non-numeric cell '" + std::string(cell) + "'");
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path.string() + ": empty CSV");
  PlaneXd out(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index r = 0; r < out.rows(); ++r)
    for (Index c = 0; c < out.cols(); ++c) out(r, c) = rows[r][c];
  return out;
}

// ---- PNG -------------------------------------------------------------------

struct FileCloser {
  void operator()(std::FILE *f) const noexcept { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

PlaneXd read_png(std::filesystem::path const &path)
{
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw FormatError("cannot open " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw FormatError(path.string() + ": not a PNG file");

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("libpng initialisation failed");
  }
  std::vector<png_bytep> row_ptrs;
  std::vector<png_byte> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": corrupt PNG");
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  png_uint_32 const width = png_get_image_width(png, info);
  png_uint_32 const height = png_get_image_height(png, info);
  int const depth = png_get_bit_depth(png, info);
  int const color = png_get_color_type(png, info);
  if (color != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": expected single-channel grayscale PNG");
  }
  if (depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16) png_set_swap(png); // little-endian host order
  png_read_update_info(png, info);

  std::size_t const rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * height);
  row_ptrs.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) row_ptrs[r] = buffer.data() + r * rowbytes;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  PlaneXd out(height, width);
  for (png_uint_32 r = 0; r < height; ++r) {
    for (png_uint_32 c = 0; c < width; ++c) {
      if (depth == 16) {
        std::uint16_t v;
        std::memcpy(&v, row_ptrs[r] + 2 * c, 2);
        out(r, c) = v;
      } else {
        out(r, c) = row_ptrs[r][c];
      }
    }
  }
  return out;
}

void write_png(std::filesystem::path const &path, int width, int height, int depth, int color_type,
               std::vector<png_byte> const &data)
{
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw Error("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw Error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error("failed writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::size_t const channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  std::size_t const rowbytes = width * channels * (depth / 8);
  for (int r = 0; r < height; ++r) png_write_row(png, const_cast<png_bytep>(data.data() + r * rowbytes));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// ---- TIFF (baseline, uncompressed, single strip set, gray) ---------------

class ByteReader
{
public:
  ByteReader(std::vector<unsigned char> bytes, std::string name)
    : bytes_(std::move(bytes))
    , name_(std::move(name))
  {
    if (bytes_.size() < 8) fail("truncated header");
    if (bytes_[0] == 'I' && bytes_[1] == 'I')
      little_ = true;
    else if (bytes_[0] == 'M' && bytes_[1] == 'M')
      little_ = false;
    else
      fail("bad byte-order mark");
    if (u16(2) != 42) fail("not a classic TIFF");
  }

  std::uint16_t u16(std::size_t off) const
  {
    check(off, 2);
    return little_ ? std::uint16_t(bytes_[off] | bytes_[off + 1] << 8) : std::uint16_t(bytes_[off] << 8 | bytes_[off + 1]);
  }
  std::uint32_t u32(std::size_t off) const
  {
    check(off, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      std::uint32_t const b = bytes_[off + (little_ ? 3 - i : i)];
      v = (v << 8) | b;
    }
    return v;
  }
  std::uint8_t u8(std::size_t off) const
  {
    check(off, 1);
    return bytes_[off];
  }
  void check(std::size_t off, std::size_t n) const
  {
    if (off + n > bytes_.size()) fail("offset out of range");
  }
  [[noreturn]] void fail(std::string const &what) const { throw FormatError(name_ + ": TIFF " + what); }

private:
  std::vector<unsigned char> bytes_;
  std::string name_;
  bool little_ = true;
};

std::vector<unsigned char> slurp(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

PlaneXd read_tiff(std::filesystem::path const &path)
{
  ByteReader rd(slurp(path), path.string());
  std::uint32_t const ifd = rd.u32(4);
  std::uint16_t const entries = rd.u16(ifd);

  std::uint32_t width = 0, height = 0, bits = 1, compression = 1, photometric = 1, samples = 1;
  std::uint32_t rows_per_strip = 0xFFFFFFFFu, sample_format = 1;
  std::vector<std::uint32_t> strip_offsets;

  // Reads the value(s) of one IFD entry; SHORT and LONG only.
  auto const values = [&](std::size_t entry) {
    std::uint16_t const type = rd.u16(entry + 2);
    std::uint32_t const count = rd.u32(entry + 4);
    std::size_t const unit = type == 3 ? 2 : type == 4 ? 4 : 0;
    if (unit == 0) rd.fail("unsupported field type " + std::to_string(type));
    std::size_t const base = unit * count <= 4 ? entry + 8 : rd.u32(entry + 8);
    std::vector<std::uint32_t> out(count);
    for (std::uint32_t i = 0; i < count; ++i) out[i] = unit == 2 ? rd.u16(base + 2 * i) : rd.u32(base + 4 * i);
    return out;
  };

  for (std::uint16_t e = 0; e < entries; ++e) {
    std::size_t const entry = ifd + 2 + 12 * std::size_t(e);
    std::uint16_t const tag = rd.u16(entry);
    switch (tag) {
    case 256: width = values(entry).at(0); break;
    case 257: height = values(entry).at(0); break;
    case 258: bits = values(entry).at(0); break;
    case 259: compression = values(entry).at(0); break;
    case 262: photometric = values(entry).at(0); break;
    case 273: strip_offsets = values(entry); break;
    case 277: samples = values(entry).at(0); break;
    case 278: rows_per_strip = values(entry).at(0); break;
    case 339: sample_format = values(entry).at(0); break;
    default: break;
    }
  }
  if (width == 0 || height == 0) rd.fail("missing dimensions");
  if (compression != 1) rd.fail("compressed data not supported");
  if (samples != 1) rd.fail("expected single-channel grayscale");
  if (bits != 8 && bits != 16) rd.fail("expected 8- or 16-bit samples");
  if (sample_format != 1) rd.fail("expected unsigned integer samples");
  if (photometric > 1) rd.fail("expected grayscale photometric interpretation");
  if (strip_offsets.empty()) rd.fail("missing strip offsets");
  rows_per_strip = std::min(rows_per_strip, height);

  double const maxval = bits == 8 ? 255.0 : 65535.0;
  std::size_t const bytes_per = bits / 8;
  PlaneXd out(height, width);
  for (std::uint32_t r = 0; r < height; ++r) {
    std::size_t const strip = r / rows_per_strip;
    if (strip >= strip_offsets.size()) rd.fail("too few strips");
    std::size_t const row_off = strip_offsets[strip] + std::size_t(r % rows_per_strip) * width * bytes_per;
    for (std::uint32_t c = 0; c < width; ++c) {
      double const v = bits == 8 ? rd.u8(row_off + c) : rd.u16(row_off + 2 * c);
      out(r, c) = photometric == 0 ? maxval - v : v;
    }
  }
  return out;
}

} // namespace

PlaneXd load_channel(std::filesystem::path const &path)
{
  if (!std::filesystem::exists(path)) throw FormatError("no such file: " + path.string());
  std::string const ext = lower_extension(path);
  if (ext == ".csv") return read_csv(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".tif" || ext == ".tiff") return read_tiff(path);
  throw FormatError(path.string() + ": unrecognised extension (expected .csv, .png, .tif)");
}

DualChannelImaged load_image(std::filesystem::path const &path_x, std::filesystem::path const &path_y)
{
  return DualChannelImaged(load_channel(path_x), load_channel(path_y));
}

MaskX load_mask(std::filesystem::path const &path)
{
  return load_channel(path) > 0.0;
}

void save_csv(std::filesystem::path const &path, PlaneXd const &values)
{
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  char buf[32];
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) {
      if (c) out << ',';
      auto const [end, ec] = std::to_chars(buf, buf + sizeof buf, values(r, c));
      out.write(buf, end - buf);
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

void save_png_gray(std::filesystem::path const &path, PlaneXd const &values, int bit_depth)
{
  if (bit_depth != 8 && bit_depth != 16) throw ParameterError("bit depth must be 8 or 16");
  double const maxval = bit_depth == 8 ? 255.0 : 65535.0;
  std::vector<png_byte> data;
  data.reserve(values.size() * (bit_depth / 8));
  for (Index r = 0; r < values.rows(); ++r) {
    for (Index c = 0; c < values.cols(); ++c) {
      auto const v = static_cast<std::uint32_t>(std::clamp(std::round(values(r, c)), 0.0, maxval));
      if (bit_depth == 16) data.push_back(static_cast<png_byte>(v >> 8));
      data.push_back(static_cast<png_byte>(v & 0xFF));
    }
  }
  write_png(path, static_cast<int>(values.cols()), static_cast<int>(values.rows()), bit_depth, PNG_COLOR_TYPE_GRAY, data);
}

void save_png_rgb(std::filesystem::path const &path, Plane<std::uint8_t> const &r, Plane<std::uint8_t> const &g,
                  Plane<std::uint8_t> const &b)
{
  if (r.rows() != g.rows() || r.rows() != b.rows() || r.cols() != g.cols() || r.cols() != b.cols())
    throw DimensionError("RGB planes differ in shape");
  std::vector<png_byte> data;
  data.reserve(3 * r.size());
  for (Index i = 0; i < r.rows(); ++i)
    for (Index j = 0; j < r.cols(); ++j) {
      data.push_back(r(i, j));
      data.push_back(g(i, j));
      data.push_back(b(i, j));
    }
  write_png(path, static_cast<int>(r.cols()), static_cast<int>(r.rows()), 8, PNG_COLOR_TYPE_RGB, data);
}

void save_tiff_gray(std::filesystem::path const &path, PlaneXd const &values, int bit_depth)
{
  if (bit_depth != 8 && bit_depth != 16) throw ParameterError("bit depth must be 8 or 16");
  double const maxval = bit_depth == 8 ? 255.0 : 65535.0;
  auto const width = static_cast<std::uint32_t>(values.cols());
  auto const height = static_cast<std::uint32_t>(values.rows());
  std::uint32_t const data_bytes = width * height * (bit_depth / 8);

  std::vector<unsigned char> out;
  auto const put16 = [&](std::uint32_t v) {
    out.push_back(v & 0xFF);
    out.push_back((v >> 8) & 0xFF);
  };
  auto const put32 = [&](std::uint32_t v) {
    put16(v & 0xFFFF);
    put16(v >> 16);
  };

  std::uint32_t const data_offset = 8;
  out = {'I', 'I'};
  put16(42);
  put32(data_offset + data_bytes + (data_bytes & 1)); // IFD on a word boundary
  for (Index r = 0; r < values.rows(); ++r)
    for (Index c = 0; c < values.cols(); ++c) {
      auto const v = static_cast<std::uint32_t>(std::clamp(std::round(values(r, c)), 0.0, maxval));
      if (bit_depth == 16)
        put16(v);
      else
        out.push_back(static_cast<unsigned char>(v));
    }
  if (data_bytes & 1) out.push_back(0);

  struct Entry {
    std::uint16_t tag, type;
    std::uint32_t value;
  };
  Entry const entries[] = {{256, 4, width},       {257, 4, height},       {258, 3, std::uint32_t(bit_depth)},
                           {259, 3, 1},           {262, 3, 1},            {273, 4, data_offset},
                           {277, 3, 1},           {278, 4, height},       {279, 4, data_bytes}};
  put16(std::size(entries));
  for (auto const &e : entries) {
    put16(e.tag);
    put16(e.type);
    put32(1);
    if (e.type == 3) {
      put16(e.value);
      put16(0);
    } else {
      put32(e.value);
    }
  }
  put32(0);

  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f.write(reinterpret_cast<char const *>(out.data()), static_cast<std::streamsize>(out.size()));
}

} // namespace saca
