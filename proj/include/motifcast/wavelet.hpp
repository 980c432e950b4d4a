#pragma once

#include <span>
#include <string>
#include <vector>

namespace motifcast::wavelet {

enum class BoundaryMode { Periodic, Symmetric };

std::string to_string(BoundaryMode mode);
BoundaryMode boundary_mode_from_string(const std::string& name);

// Orthonormal two-channel filter pair. The lowpass filter is stored in
// scaling-function order (sums to sqrt(2)); the highpass is its quadrature
// mirror: highpass[k] = (-1)^k * lowpass[L-1-k].
struct FilterBank {
    std::string name;
    std::vector<double> lowpass;
    std::vector<double> highpass;

    std::size_t length() const { return lowpass.size(); }
};

// Daubechies filter pair with the given number of vanishing moments (1..10).
// daubechies_filters(1) is the Haar pair, daubechies_filters(4) is DB4.
FilterBank daubechies_filters(int vanishing_moments);

// Parses names like "db4", "DB4", "haar".
FilterBank filter_bank_from_name(const std::string& name);

// Output of the multilevel analysis cascade. details[i] holds D_{i+1}, so
// details.front() is the finest band and approximation is A_level.
struct WaveletDecomposition {
    int level = 0;
    std::vector<double> approximation;
    std::vector<std::vector<double>> details;
    std::size_t original_length = 0;
    BoundaryMode boundary_mode = BoundaryMode::Periodic;
    std::string bank_name;
};

// Full-length series rebuilt from one coefficient set each, all others zeroed.
// low_frequency is rA_level; high_frequency[i] is rD_{i+1}. The bands sum to
// the original signal.
struct BandComponents {
    std::vector<double> low_frequency;
    std::vector<std::vector<double>> high_frequency;
};

// Number of coefficients one analysis level produces for an input of length n.
std::size_t level_output_length(std::size_t n, std::size_t filter_length, BoundaryMode mode);

WaveletDecomposition dwt_decompose(std::span<const double> signal, const FilterBank& bank,
                                   int level, BoundaryMode mode = BoundaryMode::Periodic);

std::vector<double> idwt_reconstruct(const WaveletDecomposition& decomp, const FilterBank& bank);

BandComponents band_components(std::span<const double> signal, const FilterBank& bank,
                               int level, BoundaryMode mode = BoundaryMode::Periodic);

}  // namespace motifcast::wavelet
