#pragma once

#include <stdexcept>
#include <string>

namespace privml {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value lies outside the domain an operation accepts.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Ciphertexts or keys from different key pairs were combined.
class KeyMismatch : public Error {
 public:
  using Error::Error;
};

/// Decryption could not be carried out (ciphertext not a unit, out of range).
class DecryptionError : public Error {
 public:
  using Error::Error;
};

/// The peer deviated from the protocol (impossible for honest parties).
class ProtocolViolation : public Error {
 public:
  using Error::Error;
};

/// Parameters are inconsistent or insecure (key sizing, kappa, model bounds).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed bytes on the wire or in a file.
class DecodeError : public Error {
 public:
  using Error::Error;
};

/// Vector/matrix dimensions do not chain.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace privml
