#pragma once

#include <stdexcept>
#include <string>

namespace ghzalign {

// Raised at sin(beta) ~ 0 where the z-y-z chart degenerates (gimbal lock) and
// the Fisher matrix has no inverse.
class SingularRotation : public std::domain_error {
public:
    explicit SingularRotation(const std::string& what) : std::domain_error(what) {}
};

class DegenerateState : public std::domain_error {
public:
    explicit DegenerateState(const std::string& what) : std::domain_error(what) {}
};

// Measured second moments are not compatible with any rotated GHZ state.
class InconsistentMoments : public std::runtime_error {
public:
    explicit InconsistentMoments(const std::string& what) : std::runtime_error(what) {}
};

// The azimuth is unidentifiable because the rotated axis sits at a pole.
class DegenerateInversion : public std::runtime_error {
public:
    explicit DegenerateInversion(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ghzalign
