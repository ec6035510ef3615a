#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

namespace tvoptics::imaging {

/// Grayscale image, intensities nominally in [0, 1]. Rows are image rows;
/// storage is column-major, matching the solver's pixel vectorization.
using ImageTensor = Eigen::ArrayXXd;

enum class ImageFormat { Pgm, Png };

/// Format implied by the file extension (.pgm or .png, case-insensitive).
ImageFormat format_from_extension(const std::filesystem::path& path);

/// Reads an 8-bit grayscale binary PGM (P5, maxval 255) or PNG. Pixel value k
/// becomes k / 255. The format is detected from the file signature.
ImageTensor load_image(const std::filesystem::path& path);

/// Writes an 8-bit grayscale image in the format given by the extension.
/// Values are scaled by 255, rounded half away from zero and clamped to
/// [0, 255].
void save_image(const ImageTensor& image, const std::filesystem::path& path);

/// Observation y = x + e with e ~ N(0, sigma^2) i.i.d. Not clamped.
ImageTensor degrade(const ImageTensor& image, double sigma, std::uint64_t seed);

/// Non-overlapping p x p tiling of an image. Patch k covers tile row
/// k / grid_cols and tile column k % grid_cols.
struct PatchSet {
  Eigen::Index patch_size = 16;
  Eigen::Index image_rows = 0;
  Eigen::Index image_cols = 0;
  std::vector<ImageTensor> patches;

  Eigen::Index grid_rows() const { return image_rows / patch_size; }
  Eigen::Index grid_cols() const { return image_cols / patch_size; }
};

/// Throws ConfigError unless p divides both image dimensions.
PatchSet patchify(const ImageTensor& image, Eigen::Index patch_size = 16);
ImageTensor depatchify(const PatchSet& set);

}  // namespace tvoptics::imaging
