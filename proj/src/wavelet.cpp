#include "motifcast/wavelet.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "motifcast/common.hpp"

namespace motifcast::wavelet {
namespace {

// Daubechies scaling filters in scaling-function order, generated by spectral
// factorization at 60-digit precision and rounded to double. Index p-1 holds
// the filter with p vanishing moments (2p taps).
constexpr int kMaxVanishingMoments = 10;
const std::vector<std::vector<double>> kDaubechiesLowpass = {
    // db1 (Haar)
    {0.7071067811865475244008, 0.7071067811865475244008},
    // db2
    {0.4829629131445341433749, 0.8365163037378079055753, 0.2241438680420133810260,
     -0.1294095225512603811744},
    // db3
    {0.3326705529500826159985, 0.8068915093110925764945, 0.4598775021184915700952,
     -0.1350110200102545886964, -0.08544127388202666169282, 0.03522629188570953660274},
    // db4
    {0.2303778133088965008633, 0.7148465705529156470899, 0.6308807679298589078817,
     -0.02798376941685985421141, -0.1870348117190930840796, 0.03084138183556076362722,
     0.03288301166688519973541, -0.01059740178506903210488},
    // db5
    {0.1601023979741929144807, 0.6038292697971896705401, 0.7243085284377729277281,
     0.1384281459013207315054, -0.2422948870663820318626, -0.03224486958463837464848,
     0.07757149384004571352313, -0.006241490212798274274191, -0.01258075199908199946851,
     0.003335725285473771277998},
    // db6
    {0.1115407433501094636213, 0.4946238903984530856772, 0.7511339080210953506789,
     0.3152503517091976290860, -0.2262646939654398200763, -0.1297668675672619355623,
     0.09750160558732304910234, 0.02752286553030572862554, -0.03158203931748602956508,
     0.0005538422011614961392519, 0.004777257510945510639636, -0.001077301085308479564853},
    // db7
    {0.07785205408500917901996, 0.3965393194819173065390, 0.7291320908462351199169,
     0.4697822874051931224716, -0.1439060039285649754051, -0.2240361849938749826381,
     0.07130921926683026475088, 0.08061260915108307191292, -0.03802993693501441357959,
     -0.01657454163066688065411, 0.01255099855609984061299, 0.0004295779729213665211321,
     -0.001801640704047490915268, 0.0003537137999745202484463},
    // db8
    {0.05441584224310400995501, 0.3128715909142999706592, 0.6756307362972898068078,
     0.5853546836542067127713, -0.01582910525634930566738, -0.2840155429615469265162,
     0.0004724845739132827703606, 0.1287474266204784588570, -0.01736930100180754616962,
     -0.04408825393079475150676, 0.01398102791739828164872, 0.008746094047405776716383,
     -0.004870352993451574310422, -0.0003917403733769470462981, 0.0006754494064505693663695,
     -0.0001174767841247695337306},
    // db9
    {0.03807794736387834658870, 0.2438346746125903537320, 0.6048231236901111119031,
     0.6572880780513005380782, 0.1331973858250075761910, -0.2932737832791749088064,
     -0.09684078322297646051351, 0.1485407493381063801351, 0.03072568147933337921232,
     -0.06763282906132997367564, 0.0002509471148314519575872, 0.02236166212367909720537,
     -0.004723204757751397277926, -0.004281503682463429834497, 0.001847646883056226476619,
     0.0002303857635231959672052, -0.0002519631889427101369750, 0.00003934732031627159948069},
    // db10
    {0.02667005790055555358662, 0.1881768000776914890209, 0.5272011889317255864817,
     0.6884590394536035657419, 0.2811723436605774607487, -0.2498464243273153794161,
     -0.1959462743773770435043, 0.1273693403357932600827, 0.09305736460357235116035,
     -0.07139414716639708714534, -0.02945753682187581285828, 0.03321267405934100173976,
     0.003606553566956169655423, -0.01073317548333057504432, 0.001395351747052901165789,
     0.001992405295185056117159, -0.0006858566949597116265614, -0.0001164668551292854509515,
     0.00009358867032006959133405, -0.00001326420289452124481244},
};

void check_finite(std::span<const double> signal) {
    for (double v : signal) {
        if (!std::isfinite(v)) {
            throw DataError("wavelet: signal contains non-finite samples");
        }
    }
}

// Half-sample symmetric reflection of index i into [0, n).
std::size_t reflect_index(long long i, std::size_t n) {
    const long long period = 2 * static_cast<long long>(n);
    i %= period;
    if (i < 0) i += period;
    if (i >= static_cast<long long>(n)) i = period - 1 - i;
    return static_cast<std::size_t>(i);
}

struct LevelCoeffs {
    std::vector<double> approx;
    std::vector<double> detail;
};

LevelCoeffs analyze_periodic(std::span<const double> x, const FilterBank& bank) {
    std::vector<double> padded;
    std::span<const double> in = x;
    if (x.size() % 2 != 0) {
        padded.assign(x.begin(), x.end());
        padded.push_back(x.back());
        in = padded;
    }
    const std::size_t n = in.size();
    const std::size_t half = n / 2;
    const std::size_t L = bank.length();
    LevelCoeffs out{std::vector<double>(half, 0.0), std::vector<double>(half, 0.0)};
    for (std::size_t m = 0; m < half; ++m) {
        double a = 0.0, d = 0.0;
        for (std::size_t k = 0; k < L; ++k) {
            const double v = in[(2 * m + k) % n];
            a += v * bank.lowpass[k];
            d += v * bank.highpass[k];
        }
        out.approx[m] = a;
        out.detail[m] = d;
    }
    return out;
}

std::vector<double> synthesize_periodic(std::span<const double> approx,
                                        std::span<const double> detail, const FilterBank& bank,
                                        std::size_t target_length) {
    const std::size_t n = 2 * approx.size();
    const std::size_t L = bank.length();
    std::vector<double> y(n, 0.0);
    for (std::size_t m = 0; m < approx.size(); ++m) {
        const double a = approx[m];
        const double d = detail[m];
        for (std::size_t k = 0; k < L; ++k) {
            y[(2 * m + k) % n] += a * bank.lowpass[k] + d * bank.highpass[k];
        }
    }
    y.resize(target_length);
    return y;
}

LevelCoeffs analyze_symmetric(std::span<const double> x, const FilterBank& bank) {
    const std::size_t n = x.size();
    const std::size_t L = bank.length();
    const long long m_lo = -static_cast<long long>((L - 1) / 2);
    const std::size_t count = (n + L - 1) / 2;
    LevelCoeffs out{std::vector<double>(count, 0.0), std::vector<double>(count, 0.0)};
    for (std::size_t i = 0; i < count; ++i) {
        const long long m = m_lo + static_cast<long long>(i);
        double a = 0.0, d = 0.0;
        for (std::size_t k = 0; k < L; ++k) {
            const double v = x[reflect_index(2 * m + static_cast<long long>(k), n)];
            a += v * bank.lowpass[k];
            d += v * bank.highpass[k];
        }
        out.approx[i] = a;
        out.detail[i] = d;
    }
    return out;
}

std::vector<double> synthesize_symmetric(std::span<const double> approx,
                                         std::span<const double> detail, const FilterBank& bank,
                                         std::size_t target_length) {
    const std::size_t L = bank.length();
    const long long m_lo = -static_cast<long long>((L - 1) / 2);
    std::vector<double> y(target_length, 0.0);
    for (std::size_t i = 0; i < approx.size(); ++i) {
        const long long m = m_lo + static_cast<long long>(i);
        const double a = approx[i];
        const double d = detail[i];
        for (std::size_t k = 0; k < L; ++k) {
            const long long j = 2 * m + static_cast<long long>(k);
            if (j >= 0 && j < static_cast<long long>(target_length)) {
                y[static_cast<std::size_t>(j)] += a * bank.lowpass[k] + d * bank.highpass[k];
            }
        }
    }
    return y;
}

LevelCoeffs analyze(std::span<const double> x, const FilterBank& bank, BoundaryMode mode) {
    return mode == BoundaryMode::Periodic ? analyze_periodic(x, bank) : analyze_symmetric(x, bank);
}

std::vector<double> synthesize(std::span<const double> a, std::span<const double> d,
                               const FilterBank& bank, std::size_t target_length,
                               BoundaryMode mode) {
    return mode == BoundaryMode::Periodic ? synthesize_periodic(a, d, bank, target_length)
                                          : synthesize_symmetric(a, d, bank, target_length);
}

// Input length at each cascade level: lengths[0] = n, lengths[l] feeds level l+1.
std::vector<std::size_t> cascade_lengths(std::size_t n, std::size_t filter_length, int level,
                                         BoundaryMode mode) {
    std::vector<std::size_t> lengths{n};
    for (int l = 0; l < level; ++l) {
        lengths.push_back(level_output_length(lengths.back(), filter_length, mode));
    }
    return lengths;
}

}  // namespace

std::string to_string(BoundaryMode mode) {
    return mode == BoundaryMode::Periodic ? "periodic" : "symmetric";
}

BoundaryMode boundary_mode_from_string(const std::string& name) {
    if (name == "periodic") return BoundaryMode::Periodic;
    if (name == "symmetric") return BoundaryMode::Symmetric;
    throw DataError("wavelet: unknown boundary mode '" + name + "'");
}

FilterBank daubechies_filters(int vanishing_moments) {
    if (vanishing_moments < 1 || vanishing_moments > kMaxVanishingMoments) {
        throw DataError("wavelet: unsupported Daubechies order " +
                        std::to_string(vanishing_moments) + " (supported: 1..10)");
    }
    FilterBank bank;
    bank.name = "db" + std::to_string(vanishing_moments);
    bank.lowpass = kDaubechiesLowpass[static_cast<std::size_t>(vanishing_moments - 1)];
    const std::size_t L = bank.lowpass.size();
    bank.highpass.resize(L);
    for (std::size_t k = 0; k < L; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        bank.highpass[k] = sign * bank.lowpass[L - 1 - k];
    }
    return bank;
}

FilterBank filter_bank_from_name(const std::string& name) {
    std::string lower;
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(c)));
    if (lower == "haar") return daubechies_filters(1);
    if (lower.size() > 2 && lower.compare(0, 2, "db") == 0) {
        try {
            return daubechies_filters(std::stoi(lower.substr(2)));
        } catch (const std::invalid_argument&) {
        }
    }
    throw DataError("wavelet: unknown filter bank '" + name + "'");
}

std::size_t level_output_length(std::size_t n, std::size_t filter_length, BoundaryMode mode) {
    if (mode == BoundaryMode::Periodic) return (n + 1) / 2;
    return (n + filter_length - 1) / 2;
}

WaveletDecomposition dwt_decompose(std::span<const double> signal, const FilterBank& bank,
                                   int level, BoundaryMode mode) {
    if (level < 1) throw DataError("wavelet: level must be >= 1");
    if (level > 62 || signal.size() < (1ull << level)) {
        throw DataError("wavelet: signal of length " + std::to_string(signal.size()) +
                        " is too short for level " + std::to_string(level));
    }
    check_finite(signal);

    WaveletDecomposition decomp;
    decomp.level = level;
    decomp.original_length = signal.size();
    decomp.boundary_mode = mode;
    decomp.bank_name = bank.name;
    decomp.details.resize(static_cast<std::size_t>(level));

    std::vector<double> current(signal.begin(), signal.end());
    for (int l = 0; l < level; ++l) {
        LevelCoeffs coeffs = analyze(current, bank, mode);
        decomp.details[static_cast<std::size_t>(l)] = std::move(coeffs.detail);
        current = std::move(coeffs.approx);
    }
    decomp.approximation = std::move(current);
    return decomp;
}

std::vector<double> idwt_reconstruct(const WaveletDecomposition& decomp, const FilterBank& bank) {
    if (decomp.bank_name != bank.name) {
        throw DataError("wavelet: decomposition used bank '" + decomp.bank_name +
                        "', reconstruction got '" + bank.name + "'");
    }
    if (decomp.level < 1 || decomp.details.size() != static_cast<std::size_t>(decomp.level)) {
        throw DataError("wavelet: decomposition level does not match its detail sets");
    }
    const auto lengths =
        cascade_lengths(decomp.original_length, bank.length(), decomp.level, decomp.boundary_mode);
    if (decomp.approximation.size() != lengths.back()) {
        throw DataError("wavelet: approximation length does not match the level schedule");
    }
    for (int l = 0; l < decomp.level; ++l) {
        if (decomp.details[static_cast<std::size_t>(l)].size() !=
            lengths[static_cast<std::size_t>(l + 1)]) {
            throw DataError("wavelet: detail length at level " + std::to_string(l + 1) +
                            " does not match the level schedule");
        }
    }

    std::vector<double> current = decomp.approximation;
    for (int l = decomp.level; l >= 1; --l) {
        current = synthesize(current, decomp.details[static_cast<std::size_t>(l - 1)], bank,
                             lengths[static_cast<std::size_t>(l - 1)], decomp.boundary_mode);
    }
    return current;
}

BandComponents band_components(std::span<const double> signal, const FilterBank& bank, int level,
                               BoundaryMode mode) {
    WaveletDecomposition decomp = dwt_decompose(signal, bank, level, mode);

    BandComponents bands;
    bands.high_frequency.resize(static_cast<std::size_t>(level));

    WaveletDecomposition solo;
    solo.level = decomp.level;
    solo.original_length = decomp.original_length;
    solo.boundary_mode = decomp.boundary_mode;
    solo.bank_name = decomp.bank_name;
    solo.approximation.assign(decomp.approximation.size(), 0.0);
    solo.details.resize(decomp.details.size());
    for (std::size_t i = 0; i < decomp.details.size(); ++i) {
        solo.details[i].assign(decomp.details[i].size(), 0.0);
    }

    solo.approximation = decomp.approximation;
    bands.low_frequency = idwt_reconstruct(solo, bank);
    solo.approximation.assign(decomp.approximation.size(), 0.0);

    for (std::size_t i = 0; i < decomp.details.size(); ++i) {
        solo.details[i] = decomp.details[i];
        bands.high_frequency[i] = idwt_reconstruct(solo, bank);
        solo.details[i].assign(decomp.details[i].size(), 0.0);
    }
    return bands;
}

}  // namespace motifcast::wavelet
