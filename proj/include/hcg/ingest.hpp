#pragma once

#include "hcg/core.hpp"

#include <map>
#include <string>
#include <vector>

namespace hcg {

// Grayscale raster, row-major, values in [0, maxval].
struct GrayImage {
    int width = 0;
    int height = 0;
    int maxval = 255;
    std::vector<int> pixels;

    int at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

// Everything one experiment needs, assembled from a manifest.
struct Dataset {
    std::vector<std::string> class_names;
    std::map<std::string, GroundTruth> truths;
    std::map<std::string, DetectionRecord> small_traces;
    std::map<std::string, DetectionRecord> big_traces;  // may be empty
    std::map<std::string, GrayImage> images;            // optional, for the blur baseline
    std::map<std::string, long long> image_bytes;       // optional per-image upload sizes

    int class_count() const { return static_cast<int>(class_names.size()); }
};

// JSONL detector traces, one image per line:
//   {"image_id": str, "width": int, "height": int,
//    "detections": [{"box": [xmin,ymin,xmax,ymax], "scores": [c0,...]}]}
// Boxes are clamped to image bounds on load; validation failures report the
// offending line and field. Duplicate image ids are an error.
std::map<std::string, DetectionRecord> load_traces(const std::string& path);
void write_traces(const std::string& path, const std::map<std::string, DetectionRecord>& traces);

// JSONL ground truth, one image per line:
//   {"image_id": str, "width": int, "height": int,
//    "objects": [{"class": int, "box": [xmin,ymin,xmax,ymax]}]}
std::map<std::string, GroundTruth> load_truths(const std::string& path);
void write_truths(const std::string& path, const std::map<std::string, GroundTruth>& truths);

struct VocImport {
    std::map<std::string, GroundTruth> truths;
    long skipped_objects = 0;  // objects whose class name is not in class_names
};

// Import a directory of VOC-style annotation XML files (one per image;
// image_id is the file stem). Objects of unknown classes are skipped and
// counted. Boxes are clamped to the annotated image size.
VocImport import_voc_xml(const std::string& dir, const std::vector<std::string>& class_names);

// PGM reader: magic P2 (ASCII) or P5 (binary), '#' comments allowed in the
// header, P5 with maxval > 255 read as two-byte big-endian samples.
GrayImage load_pgm(const std::string& path);
void write_pgm(const std::string& path, const GrayImage& image);

// Dataset manifest (JSON): class list plus paths, relative to the manifest:
//   {"classes": [...], "truths": "truths.jsonl", "small": "small.jsonl",
//    "big": "big.jsonl", "images_dir": "images", "labels": "labels.jsonl",
//    "image_bytes": {"id": bytes}}
// big / images_dir / labels / image_bytes are optional.
struct Manifest {
    std::vector<std::string> class_names;
    std::string truths_path;
    std::string small_path;
    std::string big_path;    // empty when absent
    std::string images_dir;  // empty when absent
    std::string labels_path; // empty when absent
    std::map<std::string, long long> image_bytes;
};

Manifest load_manifest(const std::string& path);
void write_manifest(const std::string& path, const Manifest& manifest);

// Load and cross-validate a full dataset: every traced image must be
// annotated and every score vector must match the class count.
Dataset load_dataset(const std::string& manifest_path);

} // namespace hcg
