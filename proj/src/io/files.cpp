#include "mno/io/files.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "mno/core/error.hpp"
#include "mno/io/json_reader.hpp"

namespace mno::io {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

std::vector<std::size_t> shape_vector(const StateShape& s) {
    return s.kind == StateKind::field2d ? std::vector<std::size_t>{s.n, s.n} : std::vector<std::size_t>{s.n};
}

json shape_to_json(const StateShape& s) {
    return {{"kind", to_string(s.kind)}, {"grid", shape_vector(s)}, {"domain_length", s.domain_length}};
}

StateShape shape_from_header(JsonReader& r) {
    StateShape s;
    s.kind = state_kind_from_string(r.get<std::string>("kind"));
    const auto grid = r.get<std::vector<std::size_t>>("grid");
    require(!grid.empty() && grid.size() == (s.kind == StateKind::field2d ? 2u : 1u), "header grid shape mismatch");
    s.n = grid[0];
    s.domain_length = r.get<double>("domain_length");
    return s;
}

}  // namespace

std::vector<std::uint8_t> encode(const char* magic, const json& header, const std::vector<double>& payload) {
    const std::string h = header.dump();
    std::vector<std::uint8_t> out;
    out.reserve(prefix_bytes + h.size() + 8 * payload.size());
    out.insert(out.end(), magic, magic + 8);
    put_u32(out, static_cast<std::uint32_t>(h.size()));
    put_u32(out, 0);
    out.insert(out.end(), h.begin(), h.end());
    for (double v : payload) {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
    return out;
}

Container decode(const char* magic, const std::vector<std::uint8_t>& bytes, const std::string& what) {
    if (bytes.size() < prefix_bytes || std::memcmp(bytes.data(), magic, 8) != 0)
        throw IoError(what + ": bad magic, expected " + std::string(magic, 8));
    const std::uint32_t hl = get_u32(bytes.data() + 8);
    if (get_u32(bytes.data() + 12) != 0) throw IoError(what + ": reserved prefix word is not zero");
    if (bytes.size() < prefix_bytes + hl) throw IoError(what + ": truncated header");
    Container c;
    try {
        c.header = json::parse(bytes.begin() + prefix_bytes, bytes.begin() + prefix_bytes + hl);
    } catch (const json::exception& e) {
        throw IoError(what + ": header is not valid JSON (" + e.what() + ")");
    }
    const std::size_t rest = bytes.size() - prefix_bytes - hl;
    if (rest % 8 != 0) throw IoError(what + ": payload is not a whole number of float64 values");
    c.payload.resize(rest / 8);
    const std::uint8_t* p = bytes.data() + prefix_bytes + hl;
    for (std::size_t k = 0; k < c.payload.size(); ++k) {
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[8 * k + i]) << (8 * i);
        c.payload[k] = std::bit_cast<double>(bits);
    }
    return c;
}

void atomic_write(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp" + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
        f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename onto " + path);
    }
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path);
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

std::vector<std::uint8_t> encode_dataset(const PairDataset& d) {
    json h = shape_to_json(d.shape);
    h["system"] = d.system;
    h["dt"] = d.dt;
    h["h"] = d.h;
    h["count"] = d.count();
    h["dtype"] = "f64";
    h["layout"] = "pairs";
    h["seed"] = d.seed;
    h["version"] = format_version;
    h["n_traj"] = d.n_traj;
    h["pairs_per_traj"] = d.pairs_per_traj;
    const std::size_t dim = d.shape.size();
    std::vector<double> payload;
    payload.reserve(2 * d.inputs.size());
    for (std::size_t i = 0; i < d.count(); ++i) {
        payload.insert(payload.end(), d.inputs.begin() + i * dim, d.inputs.begin() + (i + 1) * dim);
        payload.insert(payload.end(), d.outputs.begin() + i * dim, d.outputs.begin() + (i + 1) * dim);
    }
    return encode(dataset_magic, h, payload);
}

PairDataset decode_dataset(const std::vector<std::uint8_t>& bytes, const std::string& what) {
    Container c = decode(dataset_magic, bytes, what);
    PairDataset d;
    try {
        JsonReader r(c.header, "");
        if (r.get<std::string>("layout") != "pairs") throw IoError(what + ": not a pair dataset");
        if (r.get<std::string>("dtype") != "f64") throw IoError(what + ": unsupported dtype");
        r.get<int>("version");
        d.shape = shape_from_header(r);
        d.system = r.get<std::string>("system");
        d.dt = r.get<double>("dt");
        d.h = r.get<double>("h");
        d.seed = r.get<std::uint64_t>("seed");
        d.n_traj = r.get<std::size_t>("n_traj", 0);
        d.pairs_per_traj = r.get<std::size_t>("pairs_per_traj", 0);
        const auto count = r.get<std::size_t>("count");
        const std::size_t dim = d.shape.size();
        if (c.payload.size() != 2 * count * dim)
            throw IoError(what + ": payload holds " + std::to_string(c.payload.size()) + " values, header implies " +
                          std::to_string(2 * count * dim));
        d.inputs.resize(count * dim);
        d.outputs.resize(count * dim);
        for (std::size_t i = 0; i < count; ++i) {
            std::copy_n(c.payload.begin() + 2 * i * dim, dim, d.inputs.begin() + i * dim);
            std::copy_n(c.payload.begin() + (2 * i + 1) * dim, dim, d.outputs.begin() + i * dim);
        }
    } catch (const ValidationError& e) {
        throw IoError(what + ": malformed header (" + e.what() + ")");
    }
    return d;
}

void write_dataset(const std::string& path, const PairDataset& d) { atomic_write(path, encode_dataset(d)); }

PairDataset read_dataset(const std::string& path) { return decode_dataset(read_file(path), path); }

std::vector<std::uint8_t> encode_trajectory(const TrajectoryFile& t) {
    json h = shape_to_json(t.trajectory.shape);
    h["system"] = t.system;
    h["h"] = t.trajectory.h;
    h["count"] = t.trajectory.length();
    h["dtype"] = "f64";
    h["layout"] = "trajectory";
    h["seed"] = t.seed;
    h["version"] = format_version;
    h["provenance"] = t.trajectory.provenance;
    h["meta"] = t.meta;
    return encode(dataset_magic, h, t.trajectory.snapshots);
}

TrajectoryFile decode_trajectory(const std::vector<std::uint8_t>& bytes, const std::string& what) {
    Container c = decode(dataset_magic, bytes, what);
    TrajectoryFile t;
    try {
        JsonReader r(c.header, "");
        if (r.get<std::string>("layout") != "trajectory") throw IoError(what + ": not a trajectory file");
        if (r.get<std::string>("dtype") != "f64") throw IoError(what + ": unsupported dtype");
        r.get<int>("version");
        t.trajectory.shape = shape_from_header(r);
        t.system = r.get<std::string>("system");
        t.trajectory.h = r.get<double>("h");
        t.seed = r.get<std::uint64_t>("seed");
        t.trajectory.provenance = r.get<std::string>("provenance", "");
        t.meta = r.get<json>("meta", json::object());
        const auto count = r.get<std::size_t>("count");
        if (c.payload.size() != count * t.trajectory.shape.size())
            throw IoError(what + ": payload length does not match the header");
    } catch (const ValidationError& e) {
        throw IoError(what + ": malformed header (" + e.what() + ")");
    }
    t.trajectory.snapshots = std::move(c.payload);
    return t;
}

void write_trajectory(const std::string& path, const TrajectoryFile& t) { atomic_write(path, encode_trajectory(t)); }

TrajectoryFile read_trajectory(const std::string& path) { return decode_trajectory(read_file(path), path); }

std::string dataset_layout(const std::string& path) {
    const auto bytes = read_file(path);
    const Container c = decode(dataset_magic, bytes, path);
    if (!c.header.contains("layout") || !c.header["layout"].is_string()) throw IoError(path + ": header has no layout");
    return c.header["layout"].get<std::string>();
}

json architecture_to_json(const model::Model& m) {
    if (m.is_fno()) {
        const auto& a = m.fno();
        return {{"type", "fno"},
                {"dimension", a.dimension},
                {"width", a.width},
                {"modes", a.modes},
                {"n_layers", a.n_layers},
                {"projection_width", a.projection_width},
                {"activation", model::to_string(a.activation)},
                {"residual", a.residual},
                {"scale", a.scale}};
    }
    const auto& a = m.ffn();
    return {{"type", "ffn"},
            {"input_dim", a.input_dim},
            {"output_dim", a.output_dim},
            {"hidden_layers", a.hidden_layers},
            {"hidden_width", a.hidden_width},
            {"activation", model::to_string(a.activation)},
            {"residual", a.residual},
            {"scale", a.scale}};
}

model::Model model_from_json(const json& arch) {
    JsonReader r(arch, "model");
    const auto type = r.get<std::string>("type");
    if (type == "ffn") {
        model::FfnArchitecture a;
        a.input_dim = r.get<std::size_t>("input_dim", a.input_dim);
        a.output_dim = r.get<std::size_t>("output_dim", a.output_dim);
        a.hidden_layers = r.get<std::size_t>("hidden_layers", a.hidden_layers);
        a.hidden_width = r.get<std::size_t>("hidden_width", a.hidden_width);
        a.activation = model::activation_from_string(r.get<std::string>("activation", "gelu"));
        a.residual = r.get<bool>("residual", a.residual);
        a.scale = r.get<double>("scale", a.scale);
        r.finish();
        a.validate();
        return model::Model(a);
    }
    if (type == "fno") {
        model::FnoArchitecture a;
        a.dimension = r.get<int>("dimension", a.dimension);
        a.width = r.get<std::size_t>("width", a.width);
        a.modes = r.get<std::size_t>("modes", a.modes);
        a.n_layers = r.get<std::size_t>("n_layers", a.n_layers);
        a.projection_width = r.get<std::size_t>("projection_width", a.projection_width);
        a.activation = model::activation_from_string(r.get<std::string>("activation", "gelu"));
        a.residual = r.get<bool>("residual", a.residual);
        a.scale = r.get<double>("scale", a.scale);
        r.finish();
        a.validate();
        return model::Model(a);
    }
    throw ValidationError("model.type must be 'ffn' or 'fno', got '" + type + "'");
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
    json blocks = json::array();
    for (const auto& b : c.params.layout.blocks())
        blocks.push_back({{"name", b.name}, {"shape", b.shape}, {"complex", b.complex}});
    json h = {{"architecture", c.architecture}, {"blocks", blocks}, {"info", c.info}, {"dtype", "f64"},
              {"version", format_version}};
    return encode(checkpoint_magic, h, c.params.values);
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& what) {
    Container c = decode(checkpoint_magic, bytes, what);
    Checkpoint ck;
    try {
        JsonReader r(c.header, "");
        ck.architecture = r.raw("architecture");
        ck.info = r.get<json>("info", json::object());
        r.get<int>("version");
        if (r.get<std::string>("dtype") != "f64") throw IoError(what + ": unsupported dtype");
        const model::Model m = model_from_json(ck.architecture);
        const json& blocks = r.raw("blocks");
        const auto& expect = m.layout().blocks();
        if (!blocks.is_array() || blocks.size() != expect.size())
            throw IoError(what + ": parameter block list does not match the architecture");
        for (std::size_t i = 0; i < expect.size(); ++i) {
            const json& b = blocks[i];
            if (b.value("name", "") != expect[i].name ||
                b.value("shape", std::vector<std::size_t>{}) != expect[i].shape ||
                b.value("complex", false) != expect[i].complex)
                throw IoError(what + ": block " + std::to_string(i) + " does not match the architecture");
        }
        if (c.payload.size() != m.layout().total())
            throw IoError(what + ": payload holds " + std::to_string(c.payload.size()) + " values, blocks declare " +
                          std::to_string(m.layout().total()));
        ck.params = model::ModelParams(m.layout());
        ck.params.values = std::move(c.payload);
    } catch (const ValidationError& e) {
        throw IoError(what + ": malformed header (" + e.what() + ")");
    }
    return ck;
}

void write_checkpoint(const std::string& path, const Checkpoint& c) { atomic_write(path, encode_checkpoint(c)); }

Checkpoint read_checkpoint(const std::string& path) { return decode_checkpoint(read_file(path), path); }

}  // namespace mno::io
