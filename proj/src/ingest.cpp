#include "hcg/ingest.hpp"

#include <json.hpp>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;
using nlohmann::json;

namespace hcg {

namespace {

[[noreturn]] void fail_at(const std::string& path, long line, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

Box clamp_box(const Box& b, double width, double height) {
    Box out;
    out.xmin = std::clamp(b.xmin, 0.0, width);
    out.ymin = std::clamp(b.ymin, 0.0, height);
    out.xmax = std::clamp(b.xmax, 0.0, width);
    out.ymax = std::clamp(b.ymax, 0.0, height);
    return out;
}

Box parse_box(const json& j, const std::string& path, long line, const char* field) {
    if (!j.is_array() || j.size() != 4) fail_at(path, line, std::string(field) + " must be [xmin,ymin,xmax,ymax]");
    Box b;
    b.xmin = j[0].get<double>();
    b.ymin = j[1].get<double>();
    b.xmax = j[2].get<double>();
    b.ymax = j[3].get<double>();
    return b;
}

json box_to_json(const Box& b) {
    return json::array({b.xmin, b.ymin, b.xmax, b.ymax});
}

struct LineHeader {
    std::string image_id;
    int width = 0;
    int height = 0;
};

LineHeader parse_header(const json& j, const std::string& path, long line) {
    if (!j.is_object()) fail_at(path, line, "expected a JSON object");
    LineHeader h;
    if (!j.contains("image_id") || !j["image_id"].is_string()) fail_at(path, line, "missing string field image_id");
    h.image_id = j["image_id"].get<std::string>();
    if (h.image_id.empty()) fail_at(path, line, "image_id must be non-empty");
    if (!j.contains("width") || !j.contains("height")) fail_at(path, line, "missing width/height");
    h.width = j["width"].get<int>();
    h.height = j["height"].get<int>();
    if (h.width <= 0 || h.height <= 0) fail_at(path, line, "width and height must be positive");
    return h;
}

template <typename PerLine>
void for_each_jsonl(const std::string& path, PerLine&& per_line) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string text;
    long line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty()) continue;
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            fail_at(path, line_no, std::string("malformed JSON: ") + e.what());
        }
        per_line(j, line_no);
    }
}

} // namespace

std::map<std::string, DetectionRecord> load_traces(const std::string& path) {
    std::map<std::string, DetectionRecord> out;
    std::size_t score_len = 0;
    bool score_len_set = false;
    for_each_jsonl(path, [&](const json& j, long line) {
        LineHeader h = parse_header(j, path, line);
        if (out.count(h.image_id)) fail_at(path, line, "duplicate image_id " + h.image_id);
        DetectionRecord rec;
        rec.image_id = h.image_id;
        rec.width = h.width;
        rec.height = h.height;
        if (!j.contains("detections") || !j["detections"].is_array())
            fail_at(path, line, "missing detections array");
        for (const json& dj : j["detections"]) {
            RawDetection raw;
            raw.box = clamp_box(parse_box(dj.at("box"), path, line, "box"), h.width, h.height);
            if (!raw.box.valid()) fail_at(path, line, "degenerate box after clamping to image bounds");
            if (!dj.contains("scores") || !dj["scores"].is_array() || dj["scores"].empty())
                fail_at(path, line, "missing scores array");
            for (const json& sj : dj["scores"]) {
                double s = sj.get<double>();
                if (!(s >= 0.0 && s <= 1.0)) fail_at(path, line, "field scores: value outside [0,1]");
                raw.class_scores.push_back(s);
            }
            if (!score_len_set) {
                score_len = raw.class_scores.size();
                score_len_set = true;
            } else if (raw.class_scores.size() != score_len) {
                fail_at(path, line, "inconsistent class-score vector length");
            }
            rec.raw.push_back(std::move(raw));
        }
        out.emplace(rec.image_id, std::move(rec));
    });
    return out;
}

void write_traces(const std::string& path, const std::map<std::string, DetectionRecord>& traces) {
    std::ofstream outf(path, std::ios::binary);
    if (!outf) throw std::runtime_error("cannot write " + path);
    for (const auto& [id, rec] : traces) {
        json dets = json::array();
        for (const RawDetection& r : rec.raw) {
            dets.push_back({{"box", box_to_json(r.box)}, {"scores", r.class_scores}});
        }
        json j{{"image_id", id}, {"width", rec.width}, {"height", rec.height}, {"detections", dets}};
        outf << j.dump() << "\n";
    }
}

std::map<std::string, GroundTruth> load_truths(const std::string& path) {
    std::map<std::string, GroundTruth> out;
    for_each_jsonl(path, [&](const json& j, long line) {
        LineHeader h = parse_header(j, path, line);
        if (out.count(h.image_id)) fail_at(path, line, "duplicate image_id " + h.image_id);
        GroundTruth gt;
        gt.image_id = h.image_id;
        gt.width = h.width;
        gt.height = h.height;
        if (!j.contains("objects") || !j["objects"].is_array())
            fail_at(path, line, "missing objects array");
        for (const json& oj : j["objects"]) {
            GroundTruthObject obj;
            obj.class_id = oj.at("class").get<int>();
            if (obj.class_id < 0) fail_at(path, line, "field class: negative class id");
            obj.box = clamp_box(parse_box(oj.at("box"), path, line, "box"), h.width, h.height);
            if (!obj.box.valid()) fail_at(path, line, "degenerate box after clamping to image bounds");
            gt.objects.push_back(obj);
        }
        out.emplace(gt.image_id, std::move(gt));
    });
    return out;
}

void write_truths(const std::string& path, const std::map<std::string, GroundTruth>& truths) {
    std::ofstream outf(path, std::ios::binary);
    if (!outf) throw std::runtime_error("cannot write " + path);
    for (const auto& [id, gt] : truths) {
        json objs = json::array();
        for (const GroundTruthObject& o : gt.objects) {
            objs.push_back({{"class", o.class_id}, {"box", box_to_json(o.box)}});
        }
        json j{{"image_id", id}, {"width", gt.width}, {"height", gt.height}, {"objects", objs}};
        outf << j.dump() << "\n";
    }
}

VocImport import_voc_xml(const std::string& dir, const std::vector<std::string>& class_names) {
    namespace pt = boost::property_tree;
    if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".xml") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    VocImport result;
    for (const fs::path& file : files) {
        pt::ptree tree;
        try {
            pt::read_xml(file.string(), tree);
        } catch (const pt::xml_parser_error& e) {
            throw std::runtime_error(file.string() + ": unparseable XML: " + e.message());
        }
        auto ann = tree.get_child_optional("annotation");
        if (!ann) throw std::runtime_error(file.string() + ": missing annotation element");
        auto size = ann->get_child_optional("size");
        if (!size) throw std::runtime_error(file.string() + ": missing size element");

        GroundTruth gt;
        gt.image_id = file.stem().string();
        gt.width = size->get<int>("width");
        gt.height = size->get<int>("height");
        if (gt.width <= 0 || gt.height <= 0)
            throw std::runtime_error(file.string() + ": non-positive image size");

        // Coordinates go through from_chars so parsing cannot drift with the
        // global locale.
        auto coord = [&](const pt::ptree& node, const char* key) {
            std::string text = node.get<std::string>(key);
            const char* first = text.data();
            const char* last = text.data() + text.size();
            while (first < last && std::isspace(static_cast<unsigned char>(*first))) ++first;
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(first, last, value);
            if (ec != std::errc() || ptr == first)
                throw std::runtime_error(file.string() + ": bad number in " + key + ": " + text);
            return value;
        };

        for (const auto& [key, node] : *ann) {
            if (key != "object") continue;
            std::string name = node.get<std::string>("name");
            auto it = std::find(class_names.begin(), class_names.end(), name);
            if (it == class_names.end()) {
                ++result.skipped_objects;
                continue;
            }
            GroundTruthObject obj;
            obj.class_id = static_cast<int>(it - class_names.begin());
            Box b;
            b.xmin = coord(node, "bndbox.xmin");
            b.ymin = coord(node, "bndbox.ymin");
            b.xmax = coord(node, "bndbox.xmax");
            b.ymax = coord(node, "bndbox.ymax");
            if (!(b.xmin < b.xmax) || !(b.ymin < b.ymax))
                throw std::runtime_error(file.string() + ": degenerate box for object " + name);
            obj.box = clamp_box(b, gt.width, gt.height);
            if (!obj.box.valid())
                throw std::runtime_error(file.string() + ": box outside image for object " + name);
            gt.objects.push_back(obj);
        }
        if (result.truths.count(gt.image_id))
            throw std::runtime_error(file.string() + ": duplicate image id " + gt.image_id);
        result.truths.emplace(gt.image_id, std::move(gt));
    }
    return result;
}

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_pgm_token(std::istream& in, const std::string& path) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw std::runtime_error(path + ": truncated PGM header");
    return tok;
}

int parse_pgm_int(const std::string& tok, const std::string& path, const char* what) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path + ": bad " + what + " in PGM header");
    }
}

} // namespace

GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::string magic = next_pgm_token(in, path);
    if (magic != "P2" && magic != "P5") throw std::runtime_error(path + ": unsupported magic " + magic);

    GrayImage img;
    img.width = parse_pgm_int(next_pgm_token(in, path), path, "width");
    img.height = parse_pgm_int(next_pgm_token(in, path), path, "height");
    img.maxval = parse_pgm_int(next_pgm_token(in, path), path, "maxval");
    if (img.width <= 0 || img.height <= 0) throw std::runtime_error(path + ": non-positive PGM size");
    if (img.maxval <= 0 || img.maxval > 65535) throw std::runtime_error(path + ": maxval out of range");

    std::size_t count = static_cast<std::size_t>(img.width) * img.height;
    img.pixels.reserve(count);
    if (magic == "P2") {
        for (std::size_t i = 0; i < count; ++i) {
            int v = parse_pgm_int(next_pgm_token(in, path), path, "pixel");
            if (v < 0 || v > img.maxval) throw std::runtime_error(path + ": pixel value out of range");
            img.pixels.push_back(v);
        }
    } else {
        // Exactly one whitespace byte separates the header from the raster;
        // next_pgm_token has already consumed it.
        int bytes_per_sample = img.maxval > 255 ? 2 : 1;
        std::vector<unsigned char> buf(count * bytes_per_sample);
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(in.gcount()) != buf.size())
            throw std::runtime_error(path + ": truncated pixel data");
        for (std::size_t i = 0; i < count; ++i) {
            int v = bytes_per_sample == 1 ? buf[i] : (buf[2 * i] << 8) | buf[2 * i + 1];
            if (v > img.maxval) throw std::runtime_error(path + ": pixel value out of range");
            img.pixels.push_back(v);
        }
    }
    return img;
}

void write_pgm(const std::string& path, const GrayImage& image) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "P2\n" << image.width << " " << image.height << "\n" << image.maxval << "\n";
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            out << image.at(x, y) << (x + 1 == image.width ? "\n" : " ");
        }
    }
}

Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": malformed JSON: " + e.what());
    }
    Manifest m;
    if (!j.contains("classes") || !j["classes"].is_array() || j["classes"].empty())
        throw std::runtime_error(path + ": manifest needs a non-empty classes array");
    for (const json& c : j["classes"]) m.class_names.push_back(c.get<std::string>());

    fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const char* key) -> std::string {
        if (!j.contains(key) || j[key].is_null()) return {};
        std::string p = j[key].get<std::string>();
        if (p.empty()) return {};
        return (base / p).string();
    };
    m.truths_path = resolve("truths");
    m.small_path = resolve("small");
    m.big_path = resolve("big");
    m.images_dir = resolve("images_dir");
    m.labels_path = resolve("labels");
    if (m.truths_path.empty() || m.small_path.empty())
        throw std::runtime_error(path + ": manifest needs truths and small paths");
    if (j.contains("image_bytes")) {
        for (const auto& [id, v] : j["image_bytes"].items()) m.image_bytes[id] = v.get<long long>();
    }
    return m;
}

void write_manifest(const std::string& path, const Manifest& manifest) {
    fs::path base = fs::path(path).parent_path();
    auto relative = [&](const std::string& p) -> std::string {
        if (p.empty()) return {};
        return fs::path(p).lexically_relative(base).string();
    };
    json j{{"classes", manifest.class_names},
           {"truths", relative(manifest.truths_path)},
           {"small", relative(manifest.small_path)}};
    if (!manifest.big_path.empty()) j["big"] = relative(manifest.big_path);
    if (!manifest.images_dir.empty()) j["images_dir"] = relative(manifest.images_dir);
    if (!manifest.labels_path.empty()) j["labels"] = relative(manifest.labels_path);
    if (!manifest.image_bytes.empty()) j["image_bytes"] = manifest.image_bytes;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << "\n";
}

Dataset load_dataset(const std::string& manifest_path) {
    Manifest m = load_manifest(manifest_path);
    Dataset ds;
    ds.class_names = m.class_names;
    ds.truths = load_truths(m.truths_path);
    ds.small_traces = load_traces(m.small_path);
    if (!m.big_path.empty()) ds.big_traces = load_traces(m.big_path);
    ds.image_bytes = m.image_bytes;

    auto check_traces = [&](const std::map<std::string, DetectionRecord>& traces, const char* which) {
        for (const auto& [id, rec] : traces) {
            if (!ds.truths.count(id))
                throw std::runtime_error(std::string(which) + " trace image " + id + " has no ground truth");
            for (const RawDetection& r : rec.raw) {
                if (static_cast<int>(r.class_scores.size()) != ds.class_count())
                    throw std::runtime_error(std::string(which) + " trace image " + id +
                                             ": score vector length does not match class count");
            }
        }
    };
    check_traces(ds.small_traces, "small");
    check_traces(ds.big_traces, "big");

    if (!m.images_dir.empty() && fs::is_directory(m.images_dir)) {
        for (const auto& entry : fs::directory_iterator(m.images_dir)) {
            if (!entry.is_regular_file() || entry.path().extension() != ".pgm") continue;
            ds.images.emplace(entry.path().stem().string(), load_pgm(entry.path().string()));
        }
    }
    return ds;
}

} // namespace hcg
