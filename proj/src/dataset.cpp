#include "poserefine/dataset.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "poserefine/errors.hpp"
#include "poserefine/rng.hpp"

namespace fs = std::filesystem;

namespace poserefine {

namespace {

// Cheap necessary conditions for "within Frobenius 0.1 of SO(3)"; rejects
// corrupt annotation records before reorthogonalize sees them.
bool near_so3(const RotationMatrix3& m) {
    return m.gram_residual() <= 0.25 && m.det() >= 0.5;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string RecordIssue::to_string() const {
    return file + ":" + std::to_string(line) + ": " + reason;
}

AnnotationSet load_annotations(const std::string& root_dir) {
    AnnotationSet set;
    const fs::path root(root_dir);
    if (!fs::is_directory(root)) {
        throw DataError("load_annotations: '" + root_dir +
                        "' is not a directory");
    }

    const fs::path manifest = root / "manifest.txt";
    if (fs::exists(manifest)) {
        std::ifstream ms(manifest);
        std::string line;
        int lineno = 0;
        while (std::getline(ms, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::istringstream ls(line);
            int id;
            std::string name;
            if (!(ls >> id >> name)) {
                set.issues.push_back({manifest.string(), lineno,
                                      "malformed manifest entry"});
                continue;
            }
            set.objects[id] = name;
        }
    }

    const fs::path ann = root / "annotations.txt";
    if (!fs::exists(ann)) {
        set.issues.push_back({ann.string(), 0, "annotations file missing"});
        return set;
    }
    std::ifstream as(ann);
    if (!as) throw DataError("load_annotations: cannot read '" + ann.string() + "'");

    std::string line;
    int lineno = 0;
    while (std::getline(as, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        FrameAnnotation f;
        if (!(ls >> f.image >> f.object_id >> f.bbox.x_min >> f.bbox.y_min >>
              f.bbox.x_max >> f.bbox.y_max)) {
            set.issues.push_back({ann.string(), lineno, "malformed record"});
            continue;
        }
        bool ok = true;
        for (int i = 0; i < 9; ++i) {
            if (!(ls >> f.raw_rotation.m[static_cast<size_t>(i)])) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            set.issues.push_back(
                {ann.string(), lineno, "matrix has fewer than 9 entries"});
            continue;
        }
        if (!f.bbox.valid() || f.bbox.x_min < 0 || f.bbox.y_min < 0) {
            set.issues.push_back({ann.string(), lineno,
                                  "bounding box is empty or negative"});
            continue;
        }
        if (!near_so3(f.raw_rotation)) {
            set.issues.push_back(
                {ann.string(), lineno,
                 "rotation too far from SO(3) (residual " +
                     std::to_string(f.raw_rotation.gram_residual()) +
                     ", det " + std::to_string(f.raw_rotation.det()) + ")"});
            continue;
        }
        set.frames.push_back(std::move(f));
    }
    return set;
}

void write_annotations(const std::string& root_dir,
                       const std::vector<FrameAnnotation>& frames,
                       const std::map<int, std::string>& objects) {
    const fs::path root(root_dir);
    fs::create_directories(root / "images");

    std::ofstream ms(root / "manifest.txt", std::ios::trunc);
    if (!ms) throw DataError("write_annotations: cannot write manifest");
    for (const auto& [id, name] : objects) ms << id << " " << name << "\n";

    std::ofstream as(root / "annotations.txt", std::ios::trunc);
    if (!as) throw DataError("write_annotations: cannot write annotations");
    for (const FrameAnnotation& f : frames) {
        as << f.image << " " << f.object_id << " " << f.bbox.x_min << " "
           << f.bbox.y_min << " " << f.bbox.x_max << " " << f.bbox.y_max;
        for (double v : f.raw_rotation.m) as << " " << format_double(v);
        as << "\n";
    }
    if (!as) throw DataError("write_annotations: write failed");
}

UnitQuaternion clean_pose(const RotationMatrix3& raw) {
    return rotmat_to_quat(reorthogonalize(raw));
}

DatasetSplit make_split(int n, int train_n, int val_n, int test_n,
                        uint64_t seed) {
    if (train_n < 0 || val_n < 0 || test_n < 0) {
        throw std::invalid_argument("make_split: negative split size");
    }
    const int need = train_n + val_n + test_n;
    if (need > n) {
        throw std::invalid_argument(
            "make_split: need " + std::to_string(need) + " samples (" +
            std::to_string(train_n) + "+" + std::to_string(val_n) + "+" +
            std::to_string(test_n) + ") but only " + std::to_string(n) +
            " are available; short by " + std::to_string(need - n));
    }
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(seed, /*stream=*/101);  // dataset shuffle stream
    shuffle(rng, order);

    DatasetSplit split;
    split.seed = seed;
    split.train.assign(order.begin(), order.begin() + train_n);
    split.validation.assign(order.begin() + train_n,
                            order.begin() + train_n + val_n);
    split.test.assign(order.begin() + train_n + val_n,
                      order.begin() + train_n + val_n + test_n);
    return split;
}

LoadedDataset LoadedDataset::load(const std::string& root_dir,
                                  int input_size) {
    AnnotationSet ann = load_annotations(root_dir);
    LoadedDataset d;
    d.input_size = input_size;
    d.objects = std::move(ann.objects);
    d.issues = std::move(ann.issues);
    const fs::path images = fs::path(root_dir) / "images";
    d.images.reserve(ann.frames.size());
    for (const FrameAnnotation& f : ann.frames) {
        const fs::path img_path = images / f.image;
        try {
            const ImageU8 img = read_png(img_path.string());
            d.images.push_back(crop_resize(img, f.bbox, input_size));
            d.q_gt.push_back(clean_pose(f.raw_rotation));
            d.object_id.push_back(f.object_id);
        } catch (const std::exception& e) {
            d.issues.push_back({img_path.string(), 0, e.what()});
        }
    }
    return d;
}

PoseSample make_sample(const LoadedDataset& data, int index,
                       const NoiseConfig& noise, Rng& rng) {
    PoseSample s;
    s.image = data.images[static_cast<size_t>(index)];
    s.q_gt = data.q_gt[static_cast<size_t>(index)];
    s.object_id = data.object_id[static_cast<size_t>(index)];
    const NoisePair pair = perturb(s.q_gt, noise, rng);
    s.q_in = pair.q_in;
    s.q_label = pair.q_label;
    return s;
}

void generate_synthetic_dataset(const std::string& out_dir,
                                const GenDataConfig& cfg) {
    if (cfg.count <= 0) {
        throw std::invalid_argument("gen-data: count must be positive");
    }
    const fs::path root(out_dir);
    fs::create_directories(root / "images");

    Rng rng = make_rng(cfg.seed, /*stream=*/102);  // synthetic pose stream
    std::vector<FrameAnnotation> frames;
    frames.reserve(static_cast<size_t>(cfg.count));
    for (int i = 0; i < cfg.count; ++i) {
        const UnitQuaternion q = random_rotation(rng);
        const ImageU8 img = render_cuboid(q, cfg.render_size, cfg.render);

        char name[32];
        std::snprintf(name, sizeof(name), "%06d.png", i);
        write_png((root / "images" / name).string(), img);

        FrameAnnotation f;
        f.image = name;
        f.object_id = 0;
        f.bbox = project_cuboid_bbox(q, cfg.render_size, cfg.render);
        f.raw_rotation = quat_to_matrix(q);
        frames.push_back(std::move(f));
    }
    write_annotations(out_dir, frames, {{0, "cuboid"}});
}

}  // namespace poserefine
