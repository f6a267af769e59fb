#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "poserefine/image.hpp"
#include "poserefine/rotgeo.hpp"
#include "poserefine/sampler.hpp"
#include "poserefine/tensor.hpp"

// Pose-annotated image datasets. On-disk layout under a root directory:
//
//   root/images/*.png       8-bit RGB frames
//   root/annotations.txt    one record per line:
//                           <image> <object_id> <x_min> <y_min> <x_max>
//                           <y_max> <r00> <r01> ... <r22>
//                           (bbox half-open pixels; matrix row-major, "%.17g")
//   root/manifest.txt       "<object_id> <name>" per line
//
// The synthetic generator emits exactly this layout, so consumers cannot
// tell synthetic and recorded data apart.

namespace poserefine {

struct FrameAnnotation {
    std::string image;  // filename relative to root/images/
    int object_id = 0;
    BoundingBox bbox;
    RotationMatrix3 raw_rotation;  // as annotated; not yet orthogonalized
};

/// One loader diagnostic: a record that was rejected and why.
struct RecordIssue {
    std::string file;
    int line = 0;
    std::string reason;

    std::string to_string() const;
};

struct AnnotationSet {
    std::vector<FrameAnnotation> frames;
    std::map<int, std::string> objects;  // id -> name, from manifest.txt
    std::vector<RecordIssue> issues;     // rejected records, never silent
};

/// Parses root/annotations.txt and root/manifest.txt. Corrupt records are
/// skipped and reported in `issues` (with file/line); a missing
/// annotations file yields an empty set with one issue. A rotation too far
/// from SO(3) (orthonormality residual > 0.25 or det < 0.5) rejects the
/// record.
AnnotationSet load_annotations(const std::string& root_dir);

/// Writes the layout above (images are not touched). Inverse of
/// load_annotations for valid records.
void write_annotations(const std::string& root_dir,
                       const std::vector<FrameAnnotation>& frames,
                       const std::map<int, std::string>& objects);

/// reorthogonalize + rotmat_to_quat: annotation matrix to clean pose.
UnitQuaternion clean_pose(const RotationMatrix3& raw);

/// Deterministic orthographic render of the reference cuboid.
struct RenderParams {
    // Half extents; unequal on purpose so every orientation looks distinct.
    double half_x = 0.5, half_y = 0.35, half_z = 0.2;
    // One flat color per face: +x, -x, +y, -y, +z, -z.
    uint8_t face_colors[6][3] = {{206, 60, 54},  {64, 132, 214},
                                 {96, 176, 66},  {214, 92, 180},
                                 {226, 186, 48}, {70, 186, 178}};
    uint8_t background[3] = {45, 45, 45};
    double margin = 0.08;  // fraction of the half frame kept clear
};

/// Renders the cuboid rotated by q into a size x size image. Pure function
/// of its arguments: identical inputs give byte-identical images, and q/-q
/// render identically. Camera looks along -z; +y is up in the image.
ImageU8 render_cuboid(const UnitQuaternion& q, int size,
                      const RenderParams& params = {});

/// Tight pixel bounding box of the projected cuboid (pads by one pixel,
/// clamped to the frame). Matches render_cuboid's projection.
BoundingBox project_cuboid_bbox(const UnitQuaternion& q, int size,
                                const RenderParams& params = {});

struct GenDataConfig {
    int count = 1000;
    int render_size = 72;
    uint64_t seed = 0;
    RenderParams render;
};

/// Generates `count` uniformly random orientations, renders them, and
/// writes the dataset layout into out_dir. Deterministic per seed.
void generate_synthetic_dataset(const std::string& out_dir,
                                const GenDataConfig& cfg);

/// Index split over a sample list, deterministic per seed.
struct DatasetSplit {
    std::vector<int> train, validation, test;
    uint64_t seed = 0;
};

/// Shuffles [0, n) with the seed and deals the first train_n indices to
/// train, the next val_n to validation, the next test_n to test. Throws if
/// the counts exceed n, naming the shortfall.
DatasetSplit make_split(int n, int train_n, int val_n, int test_n,
                        uint64_t seed);

/// One network-ready sample.
struct PoseSample {
    Tensor image;  // {3, S, S}, values in [0, 1]
    UnitQuaternion q_gt, q_in, q_label;
    int object_id = 0;
};

/// All frames of a dataset loaded, cropped and resized to the network input
/// size, with cleaned ground-truth poses. Frames whose image is missing or
/// whose bbox is empty are reported in `issues` and skipped.
struct LoadedDataset {
    int input_size = 0;
    std::vector<Tensor> images;        // {3, S, S} each
    std::vector<UnitQuaternion> q_gt;  // cleaned
    std::vector<int> object_id;
    std::map<int, std::string> objects;
    std::vector<RecordIssue> issues;

    int size() const { return static_cast<int>(images.size()); }

    static LoadedDataset load(const std::string& root_dir, int input_size);
};

/// PoseSample for index i with fresh noise from `rng`.
PoseSample make_sample(const LoadedDataset& data, int index,
                       const NoiseConfig& noise, Rng& rng);

}  // namespace poserefine
