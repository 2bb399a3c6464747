from .arith import FactoredInteger, divisors, euler_phi, factorize, moebius, phi_star, unit_group_generators
from .characters import CharacterGroup, DirichletCharacter, Parity, all_characters, character_group, evaluate
