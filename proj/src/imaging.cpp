#include "tvoptics/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "tvoptics/errors.hpp"

namespace tvoptics::imaging {

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ImageTensor from_row_major(const unsigned char* data, Eigen::Index rows, Eigen::Index cols) {
  ImageTensor img(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) img(r, c) = data[r * cols + c] / 255.0;
  }
  return img;
}

std::vector<unsigned char> to_row_major(const ImageTensor& image) {
  std::vector<unsigned char> bytes(static_cast<std::size_t>(image.size()));
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const double v = image(r, c);
      if (!std::isfinite(v)) throw IoError("cannot save image with non-finite pixel values");
      const double level = std::clamp(std::round(v * 255.0), 0.0, 255.0);
      bytes[static_cast<std::size_t>(r * image.cols() + c)] = static_cast<unsigned char>(level);
    }
  }
  return bytes;
}

// PGM header tokens are separated by whitespace; '#' starts a comment that
// runs to the end of the line.
class PgmHeaderReader {
 public:
  PgmHeaderReader(const std::vector<unsigned char>& bytes, const std::string& name)
      : bytes_(bytes), name_(name) {}

  std::string token() {
    skip_space_and_comments();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#') {
      out.push_back(static_cast<char>(bytes_[pos_++]));
    }
    if (out.empty()) throw IoError(name_ + ": truncated PGM header");
    return out;
  }

  long number() {
    const std::string t = token();
    if (!std::all_of(t.begin(), t.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      throw IoError(name_ + ": malformed PGM header field '" + t + "'");
    }
    return std::stol(t);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw IoError(name_ + ": truncated PGM header");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::string name_;
  std::size_t pos_ = 0;
};

ImageTensor load_pgm(const std::vector<unsigned char>& bytes, const std::string& name) {
  PgmHeaderReader reader(bytes, name);
  const std::string magic = reader.token();
  if (magic == "P6" || magic == "P3") throw IoError(name + ": colour PPM is not grayscale");
  if (magic != "P5") throw IoError(name + ": unsupported PNM variant " + magic + " (need binary P5)");
  const long width = reader.number();
  const long height = reader.number();
  const long maxval = reader.number();
  if (width < 1 || height < 1) throw IoError(name + ": empty image");
  if (maxval != 255) throw IoError(name + ": only 8-bit PGM (maxval 255) is supported");
  const std::size_t offset = reader.raster_offset();
  const std::size_t needed = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < offset + needed) throw IoError(name + ": truncated PGM raster");
  return from_row_major(bytes.data() + offset, height, width);
}

ImageTensor load_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw IoError(path.string() + ": " + image.message);
  }
  const bool colour = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
  const bool wide = (image.format & PNG_FORMAT_FLAG_LINEAR) != 0;
  if (colour || alpha || wide) {
    png_image_free(&image);
    throw IoError(path.string() + ": PNG must be 8-bit grayscale without alpha");
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<unsigned char> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw IoError(path.string() + ": " + msg);
  }
  return from_row_major(buffer.data(), image.height, image.width);
}

void save_png(const ImageTensor& img, const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = to_row_major(img);
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.cols());
  image.height = static_cast<png_uint_32>(img.rows());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr)) {
    throw IoError(path.string() + ": " + image.message);
  }
}

void save_pgm(const ImageTensor& img, const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = to_row_major(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

ImageFormat format_from_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".pgm") return ImageFormat::Pgm;
  if (ext == ".png") return ImageFormat::Png;
  throw IoError(path.string() + ": unsupported image extension (use .pgm or .png)");
}

ImageTensor load_image(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = read_bytes(path);
  static const unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(bytes.begin(), bytes.begin() + 8, kPngSignature)) {
    return load_png(path);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P') return load_pgm(bytes, path.string());
  throw IoError(path.string() + ": unsupported image format");
}

void save_image(const ImageTensor& image, const std::filesystem::path& path) {
  if (image.size() == 0) throw IoError("cannot save an empty image");
  switch (format_from_extension(path)) {
    case ImageFormat::Pgm:
      save_pgm(image, path);
      break;
    case ImageFormat::Png:
      save_png(image, path);
      break;
  }
}

ImageTensor degrade(const ImageTensor& image, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw DomainError("noise standard deviation must be >= 0");
  if (sigma == 0.0) return image;
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  ImageTensor out = image;
  // Column-major draw order, i.e. the pixel-vector order.
  for (Eigen::Index i = 0; i < out.size(); ++i) out.data()[i] += noise(engine);
  return out;
}

PatchSet patchify(const ImageTensor& image, Eigen::Index patch_size) {
  if (patch_size < 2) throw ConfigError("patch size must be >= 2");
  if (image.rows() % patch_size != 0 || image.cols() % patch_size != 0) {
    throw ConfigError("patch size " + std::to_string(patch_size) + " must divide the image size " +
                      std::to_string(image.rows()) + "x" + std::to_string(image.cols()));
  }
  PatchSet set;
  set.patch_size = patch_size;
  set.image_rows = image.rows();
  set.image_cols = image.cols();
  set.patches.reserve(static_cast<std::size_t>(set.grid_rows() * set.grid_cols()));
  for (Eigen::Index pr = 0; pr < set.grid_rows(); ++pr) {
    for (Eigen::Index pc = 0; pc < set.grid_cols(); ++pc) {
      set.patches.emplace_back(image.block(pr * patch_size, pc * patch_size, patch_size, patch_size));
    }
  }
  return set;
}

ImageTensor depatchify(const PatchSet& set) {
  const Eigen::Index p = set.patch_size;
  if (p < 1 || set.image_rows % p != 0 || set.image_cols % p != 0) {
    throw ConfigError("inconsistent patch set geometry");
  }
  if (set.patches.size() != static_cast<std::size_t>(set.grid_rows() * set.grid_cols())) {
    throw ConfigError("patch count does not match the patch grid");
  }
  ImageTensor out(set.image_rows, set.image_cols);
  for (std::size_t k = 0; k < set.patches.size(); ++k) {
    const ImageTensor& patch = set.patches[k];
    if (patch.rows() != p || patch.cols() != p) throw DimensionError("patch has the wrong size");
    const auto pr = static_cast<Eigen::Index>(k) / set.grid_cols();
    const auto pc = static_cast<Eigen::Index>(k) % set.grid_cols();
    out.block(pr * p, pc * p, p, p) = patch;
  }
  return out;
}

}  // namespace tvoptics::imaging
