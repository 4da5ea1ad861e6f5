#include "fingeo/imgio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

namespace fingeo::imgio {

namespace {

void put_u16(std::string& buf, uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i)
        buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& buf, float f) {
    uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(buf, v);
}

uint16_t get_u16(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t get_u32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

float get_f32(const unsigned char* p) {
    uint32_t v = get_u32(p);
    float f;
    std::memcpy(&f, &v, 4);
    return f;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open file: " + path);
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return data;
}

void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw FormatError("cannot open file for writing: " + path);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out)
        throw FormatError("write failed: " + path);
}

// Reads a PGM token, skipping whitespace and '#' comments.
size_t next_token(const std::string& data, size_t pos, std::string& tok) {
    while (pos < data.size()) {
        char c = data[pos];
        if (c == '#') {
            while (pos < data.size() && data[pos] != '\n')
                ++pos;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++pos;
        } else {
            break;
        }
    }
    tok.clear();
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos])))
        tok += data[pos++];
    if (tok.empty())
        throw FormatError("truncated PGM header");
    return pos;
}

struct PgmRaw {
    int width = 0, height = 0;
    const unsigned char* payload = nullptr;
};

PgmRaw parse_pgm(const std::string& data) {
    std::string tok;
    size_t pos = next_token(data, 0, tok);
    if (tok != "P5") {
        if (tok == "P2")
            throw FormatError("ASCII PGM (P2) not supported, need binary P5");
        throw FormatError("not a binary PGM file");
    }
    PgmRaw r;
    long w, h, maxval;
    try {
        pos = next_token(data, pos, tok);
        w = std::stol(tok);
        pos = next_token(data, pos, tok);
        h = std::stol(tok);
        pos = next_token(data, pos, tok);
        maxval = std::stol(tok);
    } catch (const std::logic_error&) {
        throw FormatError("malformed PGM header");
    }
    if (w <= 0 || h <= 0)
        throw FormatError("malformed PGM dimensions");
    if (maxval != 255)
        throw UnsupportedError("PGM maxval must be 255");
    ++pos; // single whitespace after maxval
    if (data.size() - pos < static_cast<size_t>(w) * h)
        throw FormatError("truncated PGM payload");
    r.width = static_cast<int>(w);
    r.height = static_cast<int>(h);
    r.payload = reinterpret_cast<const unsigned char*>(data.data() + pos);
    return r;
}

} // namespace

GrayImage read_pgm(const std::string& path) {
    std::string data = read_file(path);
    PgmRaw r = parse_pgm(data);
    GrayImage img(r.width, r.height);
    for (size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = static_cast<float>(r.payload[i]) / 255.0f;
    return img;
}

void write_pgm(const GrayImage& image, const std::string& path) {
    std::string out = "P5\n" + std::to_string(image.width) + " " +
                      std::to_string(image.height) + "\n255\n";
    out.reserve(out.size() + image.pixels.size());
    for (float p : image.pixels) {
        int b = static_cast<int>(std::floor(p * 255.0f + 0.5f));
        b = std::max(0, std::min(255, b));
        out.push_back(static_cast<char>(b));
    }
    write_file(path, out);
}

Mask read_mask_pgm(const std::string& path) {
    std::string data = read_file(path);
    PgmRaw r = parse_pgm(data);
    Mask mask(r.width, r.height);
    for (size_t i = 0; i < mask.bits.size(); ++i)
        mask.bits[i] = r.payload[i] >= 128 ? 1 : 0;
    return mask;
}

void write_mask_pgm(const Mask& mask, const std::string& path) {
    std::string out = "P5\n" + std::to_string(mask.width) + " " +
                      std::to_string(mask.height) + "\n255\n";
    for (uint8_t b : mask.bits)
        out.push_back(b ? static_cast<char>(255) : static_cast<char>(0));
    write_file(path, out);
}

GridFile read_grid(const std::string& path) {
    std::string data = read_file(path);
    if (data.size() < 20)
        throw FormatError("FGRD: file too short: " + path);
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    if (std::memcmp(p, "FGRD", 4) != 0)
        throw FormatError("FGRD: bad magic: " + path);
    GridFile g;
    uint16_t version = get_u16(p + 4);
    if (version != 1)
        throw FormatError("FGRD: unsupported version");
    g.channels = get_u16(p + 6);
    g.width = get_u32(p + 8);
    g.height = get_u32(p + 12);
    g.pitch_mm = get_f32(p + 16);
    if (g.channels != 1 && g.channels != 2)
        throw FormatError("FGRD: channels must be 1 or 2");
    if (g.width == 0 || g.height == 0)
        throw FormatError("FGRD: zero dimension");
    size_t n = static_cast<size_t>(g.width) * g.height * g.channels;
    if (data.size() - 20 != n * 4)
        throw FormatError("FGRD: payload length mismatch");
    g.data.resize(n);
    for (size_t i = 0; i < n; ++i)
        g.data[i] = get_f32(p + 20 + i * 4);
    return g;
}

void write_grid(const GridFile& grid, const std::string& path) {
    size_t n = static_cast<size_t>(grid.width) * grid.height * grid.channels;
    if (grid.data.size() != n)
        throw FormatError("FGRD: data size does not match header");
    std::string out;
    out.reserve(20 + n * 4);
    out.append("FGRD");
    put_u16(out, 1);
    put_u16(out, grid.channels);
    put_u32(out, grid.width);
    put_u32(out, grid.height);
    put_f32(out, grid.pitch_mm);
    for (float f : grid.data)
        put_f32(out, f);
    write_file(path, out);
}

namespace {

GridFile read_scalar_grid(const std::string& path, float* pitch_mm) {
    GridFile g = read_grid(path);
    if (g.channels != 1)
        throw TypeMismatchError("expected 1-channel grid: " + path);
    if (pitch_mm)
        *pitch_mm = g.pitch_mm;
    return g;
}

} // namespace

DepthMap read_depth(const std::string& path, float* pitch_mm) {
    GridFile g = read_scalar_grid(path, pitch_mm);
    DepthMap d(static_cast<int>(g.width), static_cast<int>(g.height));
    d.v = std::move(g.data);
    return d;
}

PeriodMap read_period(const std::string& path, float* pitch_mm) {
    GridFile g = read_scalar_grid(path, pitch_mm);
    PeriodMap m(static_cast<int>(g.width), static_cast<int>(g.height));
    m.v = std::move(g.data);
    return m;
}

GradientMap read_gradient(const std::string& path, float* pitch_mm) {
    GridFile g = read_grid(path);
    if (g.channels != 2)
        throw TypeMismatchError("expected 2-channel grid: " + path);
    if (pitch_mm)
        *pitch_mm = g.pitch_mm;
    GradientMap m(static_cast<int>(g.width), static_cast<int>(g.height));
    size_t n = static_cast<size_t>(g.width) * g.height;
    for (size_t i = 0; i < n; ++i) {
        m.gx[i] = g.data[2 * i];
        m.gy[i] = g.data[2 * i + 1];
    }
    return m;
}

namespace {

void write_scalar_grid(const std::vector<float>& v, int w, int h, float pitch,
                       const std::string& path) {
    GridFile g;
    g.channels = 1;
    g.width = static_cast<uint32_t>(w);
    g.height = static_cast<uint32_t>(h);
    g.pitch_mm = pitch;
    g.data = v;
    write_grid(g, path);
}

} // namespace

void write_depth(const DepthMap& depth, const std::string& path, float pitch_mm) {
    write_scalar_grid(depth.v, depth.width, depth.height, pitch_mm, path);
}

void write_period(const PeriodMap& period, const std::string& path, float pitch_mm) {
    write_scalar_grid(period.v, period.width, period.height, pitch_mm, path);
}

void write_gradient(const GradientMap& grad, const std::string& path, float pitch_mm) {
    GridFile g;
    g.channels = 2;
    g.width = static_cast<uint32_t>(grad.width);
    g.height = static_cast<uint32_t>(grad.height);
    g.pitch_mm = pitch_mm;
    size_t n = static_cast<size_t>(grad.width) * grad.height;
    g.data.resize(2 * n);
    for (size_t i = 0; i < n; ++i) {
        g.data[2 * i] = grad.gx[i];
        g.data[2 * i + 1] = grad.gy[i];
    }
    write_grid(g, path);
}

Manifest read_manifest(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("manifest parse error: " + std::string(e.what()));
    }
    Manifest m;
    if (j.contains("stage"))
        m.stage = j["stage"].get<std::string>();
    if (j.contains("scale_factor"))
        m.scale_factor = j["scale_factor"].get<double>();
    if (j.contains("yaw_deg"))
        m.yaw_deg = j["yaw_deg"].get<double>();
    if (j.contains("zero_point"))
        m.zero_point = std::make_pair(j["zero_point"][0].get<double>(),
                                      j["zero_point"][1].get<double>());
    if (j.contains("canvas_offset"))
        m.canvas_offset = std::make_pair(j["canvas_offset"][0].get<double>(),
                                         j["canvas_offset"][1].get<double>());
    return m;
}

void write_manifest(const Manifest& manifest, const std::string& path) {
    nlohmann::json j = nlohmann::json::object();
    if (manifest.stage)
        j["stage"] = *manifest.stage;
    if (manifest.scale_factor)
        j["scale_factor"] = *manifest.scale_factor;
    if (manifest.yaw_deg)
        j["yaw_deg"] = *manifest.yaw_deg;
    if (manifest.zero_point)
        j["zero_point"] = {manifest.zero_point->first, manifest.zero_point->second};
    if (manifest.canvas_offset)
        j["canvas_offset"] = {manifest.canvas_offset->first,
                              manifest.canvas_offset->second};
    write_file(path, j.dump(2) + "\n");
}

std::string manifest_path_for(const std::string& path) {
    size_t slash = path.find_last_of('/');
    size_t dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + ".json";
    return path.substr(0, dot) + ".json";
}

} // namespace fingeo::imgio
