#include "nixforge/model_config.hpp"

#include <cmath>
#include <sstream>

#include "nixforge/error.hpp"

namespace nixforge {

const char* const kDefaultSymbols =
    "abcdefghijklmnopqrstuvwxyz0123456789 .,!?'-:;\"()";

int DecoderConfig::upsample_product() const {
    int p = 1;
    for (int r : upsample_rates) p *= r;
    return p;
}

std::vector<int> DiscriminatorConfig::layer_widths() const {
    static const int teacher[] = {32, 128, 512, 1024, 1024};
    std::vector<int> widths;
    for (int i = 0; i < 5; ++i) {
        double w = teacher[i];
        if (i >= scale_start_layer) w *= channel_scale;
        widths.push_back(static_cast<int>(std::lround(w)));
    }
    return widths;
}

void ModelConfig::validate() const {
    if (encoder.hidden <= 0 || encoder.latent_channels <= 0)
        throw ConfigError("encoder widths must be positive");
    if (encoder.kernel_size % 2 == 0 || encoder.duration_kernel % 2 == 0)
        throw ConfigError("encoder kernel sizes must be odd");
    if (encoder.symbols.empty())
        throw ConfigError("symbol table must be non-empty");
    for (int k : decoder.mrf_kernels)
        if (k % 2 == 0) throw ConfigError("mrf kernel sizes must be odd");
    if (decoder.upsample_rates.size() != decoder.upsample_kernels.size())
        throw ConfigError("upsample rates/kernels length mismatch");
    if (decoder.upsample_product() != spectrogram.hop_length)
        throw ConfigError("upsample rate product " +
                          std::to_string(decoder.upsample_product()) +
                          " must equal hop length " +
                          std::to_string(spectrogram.hop_length));
    if (decoder.input_channels != encoder.latent_channels)
        throw ConfigError("decoder input width must match latent channels");
    for (size_t i = 0; i < discriminator.periods.size(); ++i)
        for (size_t j = i + 1; j < discriminator.periods.size(); ++j)
            if (discriminator.periods[i] == discriminator.periods[j])
                throw ConfigError("discriminator periods must be distinct");
    spectrogram.validate();
}

namespace {

std::string escape_symbols(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == ' ') out += "\\s";
        else if (c == '\\') out += "\\\\";
        else out += c;
    }
    return out;
}

std::string unescape_symbols(const std::string& s) {
    std::string out;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            ++i;
            out += s[i] == 's' ? ' ' : s[i];
        } else {
            out += s[i];
        }
    }
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::ostringstream os;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) os << ",";
        os << v[i];
    }
    return os.str();
}

std::vector<int> split_ints(const std::string& s) {
    std::vector<int> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (!item.empty()) out.push_back(std::stoi(item));
    }
    return out;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

} // namespace

std::string ModelConfig::to_config_text() const {
    std::ostringstream os;
    os << "# nixforge model configuration\n";
    os << "symbols = " << escape_symbols(encoder.symbols) << "\n";
    os << "hidden = " << encoder.hidden << "\n";
    os << "kernel_size = " << encoder.kernel_size << "\n";
    os << "dilations = " << join_ints(encoder.dilations) << "\n";
    os << "n_blocks_text = " << encoder.n_blocks_text << "\n";
    os << "n_blocks_latent = " << encoder.n_blocks_latent << "\n";
    os << "aligner_dim = " << encoder.aligner_dim << "\n";
    os << "aligner_hidden = " << encoder.aligner_hidden << "\n";
    os << "duration_kernel = " << encoder.duration_kernel << "\n";
    os << "duration_hidden = " << encoder.duration_hidden << "\n";
    os << "latent_channels = " << encoder.latent_channels << "\n";
    os << "decoder_input = " << decoder.input_channels << "\n";
    os << "upsample_initial = " << decoder.upsample_initial << "\n";
    os << "upsample_rates = " << join_ints(decoder.upsample_rates) << "\n";
    os << "upsample_kernels = " << join_ints(decoder.upsample_kernels) << "\n";
    os << "mrf_kernels = " << join_ints(decoder.mrf_kernels) << "\n";
    os << "mrf_dilations = " << join_ints(decoder.mrf_dilations) << "\n";
    os << "pre_kernel = " << decoder.pre_kernel << "\n";
    os << "post_kernel = " << decoder.post_kernel << "\n";
    os << "separable = " << (decoder.separable ? "true" : "false") << "\n";
    os << "disc_periods = " << join_ints(discriminator.periods) << "\n";
    os << "disc_channel_scale = " << discriminator.channel_scale << "\n";
    os << "disc_scale_start_layer = " << discriminator.scale_start_layer << "\n";
    os << "sample_rate = " << spectrogram.sample_rate << "\n";
    os << "n_fft = " << spectrogram.n_fft << "\n";
    os << "win_length = " << spectrogram.win_length << "\n";
    os << "hop_length = " << spectrogram.hop_length << "\n";
    os << "n_mels = " << spectrogram.n_mels << "\n";
    os << "fmin = " << spectrogram.fmin << "\n";
    os << "fmax = " << spectrogram.fmax << "\n";
    os << "mel_scale = "
       << (spectrogram.mel_scale == MelScale::htk ? "htk" : "slaney") << "\n";
    return os.str();
}

ModelConfig ModelConfig::from_config_text(const std::string& text) {
    ModelConfig cfg;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("bad config line: " + line);
        std::string key = trim(t.substr(0, eq));
        std::string value = trim(t.substr(eq + 1));

        if (key == "symbols") cfg.encoder.symbols = unescape_symbols(value);
        else if (key == "hidden") cfg.encoder.hidden = std::stoi(value);
        else if (key == "kernel_size") cfg.encoder.kernel_size = std::stoi(value);
        else if (key == "dilations") cfg.encoder.dilations = split_ints(value);
        else if (key == "n_blocks_text") cfg.encoder.n_blocks_text = std::stoi(value);
        else if (key == "n_blocks_latent")
            cfg.encoder.n_blocks_latent = std::stoi(value);
        else if (key == "aligner_dim") cfg.encoder.aligner_dim = std::stoi(value);
        else if (key == "aligner_hidden")
            cfg.encoder.aligner_hidden = std::stoi(value);
        else if (key == "duration_kernel")
            cfg.encoder.duration_kernel = std::stoi(value);
        else if (key == "duration_hidden")
            cfg.encoder.duration_hidden = std::stoi(value);
        else if (key == "latent_channels")
            cfg.encoder.latent_channels = std::stoi(value);
        else if (key == "decoder_input")
            cfg.decoder.input_channels = std::stoi(value);
        else if (key == "upsample_initial")
            cfg.decoder.upsample_initial = std::stoi(value);
        else if (key == "upsample_rates")
            cfg.decoder.upsample_rates = split_ints(value);
        else if (key == "upsample_kernels")
            cfg.decoder.upsample_kernels = split_ints(value);
        else if (key == "mrf_kernels") cfg.decoder.mrf_kernels = split_ints(value);
        else if (key == "mrf_dilations")
            cfg.decoder.mrf_dilations = split_ints(value);
        else if (key == "pre_kernel") cfg.decoder.pre_kernel = std::stoi(value);
        else if (key == "post_kernel") cfg.decoder.post_kernel = std::stoi(value);
        else if (key == "separable") cfg.decoder.separable = value == "true";
        else if (key == "disc_periods")
            cfg.discriminator.periods = split_ints(value);
        else if (key == "disc_channel_scale")
            cfg.discriminator.channel_scale = std::stod(value);
        else if (key == "disc_scale_start_layer")
            cfg.discriminator.scale_start_layer = std::stoi(value);
        else if (key == "sample_rate") cfg.spectrogram.sample_rate = std::stoi(value);
        else if (key == "n_fft") cfg.spectrogram.n_fft = std::stoi(value);
        else if (key == "win_length") cfg.spectrogram.win_length = std::stoi(value);
        else if (key == "hop_length") cfg.spectrogram.hop_length = std::stoi(value);
        else if (key == "n_mels") cfg.spectrogram.n_mels = std::stoi(value);
        else if (key == "fmin") cfg.spectrogram.fmin = std::stod(value);
        else if (key == "fmax") cfg.spectrogram.fmax = std::stod(value);
        else if (key == "mel_scale")
            cfg.spectrogram.mel_scale =
                value == "htk" ? MelScale::htk : MelScale::slaney;
        else
            throw ConfigError("unknown config key: " + key);
    }
    return cfg;
}

} // namespace nixforge
