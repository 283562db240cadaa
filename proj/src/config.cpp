#include "hetnet/config.hpp"

#include <string>

#include "hetnet/errors.hpp"

namespace hetnet {

void validate_tiers(const std::vector<TierSpec>& tiers) {
    if (tiers.empty()) throw ConfigError("at least one tier required");
    const int K = num_tiers(tiers);
    for (int k = 1; k <= K; ++k) {
        const TierSpec& t = tiers[k - 1];
        std::string tag = "tier " + std::to_string(k) + ": ";
        if (t.index != k) throw ConfigError(tag + "index must equal its position");
        if (!(t.intensity >= 0.0)) throw ConfigError(tag + "intensity must be >= 0");
        if (!(t.power > 0.0)) throw ConfigError(tag + "power must be > 0");
        if (t.contends() && !(t.max_backoff >= 0.0)) throw ConfigError(tag + "max_backoff must be >= 0");
        if (t.contends() && !(t.sensing_radius > 0.0)) throw ConfigError(tag + "sensing_radius must be > 0");
        bool last = k == K;
        if (last != (t.rat == Rat::u_only)) throw ConfigError(tag + "exactly the last tier must be U-only");
    }
}

void validate_channel(const ChannelParams& ch) {
    if (!(ch.alpha > 2.0)) throw ConfigError("alpha > 2 required");
    if (!(ch.gate_threshold > 0.0)) throw ConfigError("gate threshold Delta > 0 required");
    if (!(ch.sir_threshold > 0.0)) throw ConfigError("SIR threshold theta > 0 required");
    if (!(ch.shadowing_sigma_db >= 0.0)) throw ConfigError("shadowing sigma >= 0 required");
}

} // namespace hetnet
