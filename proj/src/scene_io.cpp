#include "jtms/scene_io.hpp"

#include <filesystem>
#include <set>
#include <stdexcept>

#include "jtms/text.hpp"

namespace jtms {

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
    throw std::invalid_argument("line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::string dump_trajectories(const TrajectoryFile& file) {
    std::string out = "jtms-traj 1 " + format_double(file.image_width) + " " +
                      format_double(file.image_height) + "\n";
    for (const Trajectory& t : file.trajectories) {
        out += std::to_string(t.id) + " " + std::to_string(t.start_frame);
        for (const auto& p : t.points)
            out += " " + format_double(p[0]) + " " + format_double(p[1]);
        out += " | " + format_double(t.color.r) + " " + format_double(t.color.g) + " " +
               format_double(t.color.b) + "\n";
    }
    return out;
}

TrajectoryFile parse_trajectories(std::string_view text) {
    LineReader reader(text);
    std::string_view line;
    if (!reader.next(line)) parse_error(1, "empty trajectory file");
    auto header = split_fields(line);
    if (header.size() != 4 || header[0] != "jtms-traj" || header[1] != "1")
        parse_error(reader.line_number(), "expected header 'jtms-traj 1 <w> <h>'");
    TrajectoryFile file;
    const auto ctx = [&] { return "line " + std::to_string(reader.line_number()); };
    file.image_width = parse_double(header[2], ctx());
    file.image_height = parse_double(header[3], ctx());

    std::set<int> seen_ids;
    while (reader.next(line)) {
        auto fields = split_fields(line);
        // id t0 (x y)+ | r g b  -> at least 2 + 2 + 1 + 3 fields
        if (fields.size() < 8) parse_error(reader.line_number(), "trajectory record too short");
        if (fields[fields.size() - 4] != "|")
            parse_error(reader.line_number(), "missing '|' before the color fields");
        const std::size_t point_fields = fields.size() - 6;  // id t0 ... | r g b
        if (point_fields % 2 != 0 || point_fields == 0)
            parse_error(reader.line_number(), "unpaired point coordinates");
        Trajectory t;
        t.id = static_cast<int>(parse_int(fields[0], ctx()));
        t.start_frame = static_cast<int>(parse_int(fields[1], ctx()));
        for (std::size_t i = 2; i + 1 < fields.size() - 4; i += 2)
            t.points.push_back(
                {parse_double(fields[i], ctx()), parse_double(fields[i + 1], ctx())});
        t.color.r = parse_double(fields[fields.size() - 3], ctx());
        t.color.g = parse_double(fields[fields.size() - 2], ctx());
        t.color.b = parse_double(fields[fields.size() - 1], ctx());
        if (t.points.size() < 2)
            parse_error(reader.line_number(), "trajectory needs at least 2 points");
        if (!seen_ids.insert(t.id).second)
            parse_error(reader.line_number(),
                        "duplicate trajectory id " + std::to_string(t.id));
        file.trajectories.push_back(std::move(t));
    }
    return file;
}

std::string dump_detections(const std::vector<Detection>& detections) {
    std::string out = "jtms-det 1\n";
    for (const Detection& d : detections) {
        out += std::to_string(d.id) + " " + std::to_string(d.frame) + " " +
               format_double(d.cx) + " " + format_double(d.cy) + " " + format_double(d.w) +
               " " + format_double(d.h) + " " + format_double(d.score) + " " +
               std::to_string(d.template_id) + "\n";
    }
    return out;
}

std::vector<Detection> parse_detections(std::string_view text) {
    LineReader reader(text);
    std::string_view line;
    if (!reader.next(line) || line != "jtms-det 1")
        parse_error(reader.line_number() == 0 ? 1 : reader.line_number(),
                    "expected header 'jtms-det 1'");
    std::vector<Detection> detections;
    std::set<int> seen_ids;
    const auto ctx = [&] { return "line " + std::to_string(reader.line_number()); };
    while (reader.next(line)) {
        auto fields = split_fields(line);
        if (fields.size() != 8)
            parse_error(reader.line_number(),
                        "expected '<id> <frame> <cx> <cy> <w> <h> <score> <template_id>'");
        Detection d;
        d.id = static_cast<int>(parse_int(fields[0], ctx()));
        d.frame = static_cast<int>(parse_int(fields[1], ctx()));
        d.cx = parse_double(fields[2], ctx());
        d.cy = parse_double(fields[3], ctx());
        d.w = parse_double(fields[4], ctx());
        d.h = parse_double(fields[5], ctx());
        d.score = parse_double(fields[6], ctx());
        d.template_id = static_cast<int>(parse_int(fields[7], ctx()));
        if (d.w <= 0.0 || d.h <= 0.0)
            parse_error(reader.line_number(), "detection size must be positive");
        if (!seen_ids.insert(d.id).second)
            parse_error(reader.line_number(), "duplicate detection id " + std::to_string(d.id));
        detections.push_back(std::move(d));
    }
    return detections;
}

std::string dump_template(const TemplateGrid& grid) {
    std::string out = std::to_string(grid.height) + " " + std::to_string(grid.width) + "\n";
    for (int r = 0; r < grid.height; ++r) {
        for (int c = 0; c < grid.width; ++c) {
            if (c > 0) out += " ";
            out += format_double(grid.at(r, c));
        }
        out += "\n";
    }
    return out;
}

TemplateGrid parse_template(std::string_view text) {
    LineReader reader(text);
    std::string_view line;
    if (!reader.next(line)) parse_error(1, "empty template file");
    auto header = split_fields(line);
    const auto ctx = [&] { return "line " + std::to_string(reader.line_number()); };
    if (header.size() != 2) parse_error(reader.line_number(), "expected 'H W'");
    TemplateGrid grid;
    grid.height = static_cast<int>(parse_int(header[0], ctx()));
    grid.width = static_cast<int>(parse_int(header[1], ctx()));
    if (grid.height <= 0 || grid.width <= 0)
        parse_error(reader.line_number(), "template size must be positive");
    grid.values.reserve(static_cast<std::size_t>(grid.height) * grid.width);
    for (int r = 0; r < grid.height; ++r) {
        if (!reader.next(line)) parse_error(reader.line_number() + 1, "missing template row");
        auto fields = split_fields(line);
        if (static_cast<int>(fields.size()) != grid.width)
            parse_error(reader.line_number(), "template row has wrong width");
        for (const auto& f : fields) {
            const double v = parse_double(f, ctx());
            if (v < 0.0 || v > 1.0)
                parse_error(reader.line_number(), "template value outside [0, 1]");
            grid.values.push_back(v);
        }
    }
    return grid;
}

std::string dump_ground_truth(const SceneGroundTruth& gt) {
    std::string out = "jtms-gt 1\n";
    for (const auto& [id, obj] : gt.trajectory_object)
        out += "t " + std::to_string(id) + " " + std::to_string(obj) + "\n";
    for (const auto& [id, obj] : gt.detection_object)
        out += "d " + std::to_string(id) + " " + std::to_string(obj) + "\n";
    for (const auto& [obj, frames] : gt.true_boxes)
        for (const auto& [frame, box] : frames)
            out += "b " + std::to_string(obj) + " " + std::to_string(frame) + " " +
                   format_double(box.cx()) + " " + format_double(box.cy()) + " " +
                   format_double(box.w) + " " + format_double(box.h) + "\n";
    return out;
}

SceneGroundTruth parse_ground_truth(std::string_view text) {
    LineReader reader(text);
    std::string_view line;
    if (!reader.next(line) || line != "jtms-gt 1")
        parse_error(reader.line_number() == 0 ? 1 : reader.line_number(),
                    "expected header 'jtms-gt 1'");
    SceneGroundTruth gt;
    const auto ctx = [&] { return "line " + std::to_string(reader.line_number()); };
    while (reader.next(line)) {
        auto fields = split_fields(line);
        if (fields[0] == "t" && fields.size() == 3) {
            gt.trajectory_object[static_cast<int>(parse_int(fields[1], ctx()))] =
                static_cast<int>(parse_int(fields[2], ctx()));
        } else if (fields[0] == "d" && fields.size() == 3) {
            gt.detection_object[static_cast<int>(parse_int(fields[1], ctx()))] =
                static_cast<int>(parse_int(fields[2], ctx()));
        } else if (fields[0] == "b" && fields.size() == 7) {
            const int obj = static_cast<int>(parse_int(fields[1], ctx()));
            const int frame = static_cast<int>(parse_int(fields[2], ctx()));
            const double cx = parse_double(fields[3], ctx());
            const double cy = parse_double(fields[4], ctx());
            const double w = parse_double(fields[5], ctx());
            const double h = parse_double(fields[6], ctx());
            gt.true_boxes[obj][frame] = Box::from_center(cx, cy, w, h);
        } else {
            parse_error(reader.line_number(), "unknown ground-truth record");
        }
    }
    return gt;
}

void resolve_templates(
    std::vector<Detection>& detections,
    const std::map<int, std::shared_ptr<const TemplateGrid>>& templates) {
    for (Detection& d : detections) {
        if (d.template_id < 0) continue;
        auto it = templates.find(d.template_id);
        if (it == templates.end())
            throw std::invalid_argument("detection " + std::to_string(d.id) +
                                        " references unknown template " +
                                        std::to_string(d.template_id));
        d.tmpl = it->second;
    }
}

std::map<int, std::shared_ptr<const TemplateGrid>> load_templates(
    const std::string& dir, const std::vector<Detection>& detections) {
    std::map<int, std::shared_ptr<const TemplateGrid>> templates;
    for (const Detection& d : detections) {
        if (d.template_id < 0 || templates.count(d.template_id)) continue;
        const std::string path = dir + "/" + std::to_string(d.template_id) + ".txt";
        if (!std::filesystem::exists(path))
            throw std::invalid_argument("detection " + std::to_string(d.id) +
                                        " references missing template file " + path);
        templates[d.template_id] =
            std::make_shared<const TemplateGrid>(parse_template(read_text_file(path)));
    }
    return templates;
}

void write_scene_dir(const std::string& dir, const SceneBundle& bundle) {
    std::filesystem::create_directories(dir + "/templates");
    TrajectoryFile tf;
    tf.image_width = bundle.spec.width;
    tf.image_height = bundle.spec.height;
    tf.trajectories = bundle.trajectories;
    write_text_file(dir + "/trajectories.txt", dump_trajectories(tf));
    write_text_file(dir + "/detections.txt", dump_detections(bundle.detections));
    for (std::size_t i = 0; i < bundle.templates.size(); ++i)
        write_text_file(dir + "/templates/" + std::to_string(i) + ".txt",
                        dump_template(bundle.templates[i]));
    write_text_file(dir + "/ground_truth.txt", dump_ground_truth(bundle.ground_truth));
}

}  // namespace jtms
