#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "dysalign/corpus_io.hpp"
#include "dysalign/errors.hpp"
#include "dysalign/training.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace dysalign {

namespace {

constexpr char kMagic[8] = {'D', 'Y', 'S', 'C', 'K', 'P', 'T', '\0'};

using json = nlohmann::ordered_json;

json encoder_json(const EncoderConfig& c) {
    return json{{"embed_dim", c.embed_dim},
                {"context_layers", c.context_layers},
                {"fusion_layers", c.fusion_layers},
                {"heads", c.heads},
                {"rel_distance", c.rel_distance},
                {"relation_bias", c.relation_bias},
                {"ffn_hidden", c.ffn_hidden},
                {"conv_kernel", c.conv_kernel},
                {"conv_channels", c.conv_channels},
                {"mlp_hidden", c.mlp_hidden},
                {"classes", c.classes},
                {"max_len", c.max_len},
                {"char_dim", c.char_dim}};
}

EncoderConfig encoder_from_json(const json& j) {
    EncoderConfig c;
    c.embed_dim = j.at("embed_dim").get<std::size_t>();
    c.context_layers = j.at("context_layers").get<std::size_t>();
    c.fusion_layers = j.at("fusion_layers").get<std::size_t>();
    c.heads = j.at("heads").get<std::size_t>();
    c.rel_distance = j.at("rel_distance").get<std::size_t>();
    c.relation_bias = j.at("relation_bias").get<bool>();
    c.ffn_hidden = j.at("ffn_hidden").get<std::size_t>();
    c.conv_kernel = j.at("conv_kernel").get<std::size_t>();
    c.conv_channels = j.at("conv_channels").get<std::size_t>();
    c.mlp_hidden = j.at("mlp_hidden").get<std::size_t>();
    c.classes = j.at("classes").get<std::size_t>();
    c.max_len = j.at("max_len").get<std::size_t>();
    c.char_dim = j.at("char_dim").get<std::size_t>();
    return c;
}

template <typename T>
void put(std::vector<unsigned char>& out, T value) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T>
T get(const std::vector<unsigned char>& in, std::size_t& pos) {
    if (pos + sizeof(T) > in.size()) throw ModelError("checkpoint is truncated");
    T value;
    std::memcpy(&value, in.data() + pos, sizeof(T));
    pos += sizeof(T);
    return value;
}

std::uint32_t crc32_of(const unsigned char* data, std::size_t size) {
    uLong crc = crc32(0L, Z_NULL, 0);
    while (size > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
        crc = crc32(crc, data, chunk);
        data += chunk;
        size -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<unsigned char> checkpoint_bytes(const NeuralAligner& model, const CheckpointMetadata& metadata) {
    json params = json::array();
    for (const auto& p : model.parameter_table())
        params.push_back(json{{"name", p.name}, {"rows", p.rows}, {"cols", p.cols}});
    const TokenizerSpec& tok = model.tokenizer();
    const json header{
        {"format", "dysalign-checkpoint"},
        {"encoder", encoder_json(model.config())},
        {"tokenizer",
         json{{"level", std::string(level_name(tok.level()))}, {"symbols", tok.symbols()}, {"chars", tok.chars()}}},
        {"metadata",
         json{{"seed", metadata.seed},
              {"epochs", metadata.epochs},
              {"final_loss", metadata.final_loss},
              {"epoch_loss", metadata.epoch_loss}}},
        {"parameters", params},
    };
    const std::string text = header.dump();

    std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
    put<std::uint32_t>(out, ModelCheckpoint::kVersion);
    put<std::uint64_t>(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
    for (double v : model.parameters()) put<float>(out, static_cast<float>(v));
    put<std::uint32_t>(out, crc32_of(out.data(), out.size()));
    return out;
}

ModelCheckpoint checkpoint_from_bytes(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < sizeof(kMagic) + 4 + 8 + 4 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
        throw ModelError("not a dysalign checkpoint (bad magic)");
    const std::size_t body = bytes.size() - 4;
    std::uint32_t stored;
    std::memcpy(&stored, bytes.data() + body, 4);
    if (stored != crc32_of(bytes.data(), body)) throw ModelError("checkpoint checksum mismatch");

    std::size_t pos = sizeof(kMagic);
    const auto version = get<std::uint32_t>(bytes, pos);
    if (version != ModelCheckpoint::kVersion)
        throw ModelError("unsupported checkpoint version " + std::to_string(version));
    const auto header_len = get<std::uint64_t>(bytes, pos);
    if (header_len > body - pos) throw ModelError("checkpoint header length out of range");
    json header;
    try {
        header = json::parse(bytes.begin() + std::ptrdiff_t(pos), bytes.begin() + std::ptrdiff_t(pos + header_len));
    } catch (const json::exception& e) {
        throw ModelError(std::string("checkpoint header is not valid JSON: ") + e.what());
    }
    pos += header_len;

    try {
        const EncoderConfig enc = encoder_from_json(header.at("encoder"));
        const json& tj = header.at("tokenizer");
        TokenizerSpec tok(parse_level(tj.at("level").get<std::string>()),
                          tj.at("symbols").get<std::vector<std::string>>(),
                          tj.at("chars").get<std::vector<std::string>>());
        std::size_t total = 0;
        for (const auto& p : header.at("parameters"))
            total += p.at("rows").get<std::size_t>() * p.at("cols").get<std::size_t>();
        if ((body - pos) != total * sizeof(float))
            throw ModelError("checkpoint parameter block has the wrong size");
        std::vector<double> values(total);
        for (auto& v : values) v = static_cast<double>(get<float>(bytes, pos));

        NeuralAligner model(enc, std::move(tok), std::move(values));
        const auto& table = model.parameter_table();
        const auto& stored_table = header.at("parameters");
        if (stored_table.size() != table.size()) throw ModelError("checkpoint parameter table does not match");
        for (std::size_t i = 0; i < table.size(); ++i)
            if (stored_table[i].at("name").get<std::string>() != table[i].name ||
                stored_table[i].at("rows").get<std::size_t>() != table[i].rows ||
                stored_table[i].at("cols").get<std::size_t>() != table[i].cols)
                throw ModelError("checkpoint parameter '" + table[i].name + "' does not match the layout");

        const json& mj = header.at("metadata");
        CheckpointMetadata meta;
        meta.seed = mj.at("seed").get<std::uint64_t>();
        meta.epochs = mj.at("epochs").get<std::size_t>();
        meta.final_loss = mj.at("final_loss").get<double>();
        meta.epoch_loss = mj.at("epoch_loss").get<std::vector<double>>();
        return ModelCheckpoint{version, std::move(model), std::move(meta)};
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed checkpoint header: ") + e.what());
    } catch (const DataError& e) {
        throw ModelError(std::string("malformed checkpoint header: ") + e.what());
    }
}

void save_checkpoint(const std::string& path, const NeuralAligner& model, const CheckpointMetadata& metadata) {
    const auto bytes = checkpoint_bytes(model, metadata);
    write_file_atomic(path, std::string(bytes.begin(), bytes.end()));
}

ModelCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open checkpoint '" + path + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return checkpoint_from_bytes(bytes);
}

}  // namespace dysalign
