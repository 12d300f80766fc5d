#ifndef GAUSSGEO_HPP
#define GAUSSGEO_HPP

#include "gaussgeo/errors.hpp"
#include "gaussgeo/matcore.hpp"
#include "gaussgeo/manifold.hpp"
#include "gaussgeo/sympair.hpp"
#include "gaussgeo/geodesic.hpp"
#include "gaussgeo/ahm.hpp"
#include "gaussgeo/laxflow.hpp"

#endif  // GAUSSGEO_HPP
