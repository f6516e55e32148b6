"""
Wire formats of the minimax app.

Input serializers validate a JSON document and build the domain object in
`create()`, so `serializer.save()` returns a GameSpec, WeakNorm, YNet,
PaymentFreeRep or RiskSpace. The same classes serialize those objects back.
"""
from rest_framework import exceptions, serializers

from minimax.exceptions import MinimaxError
from minimax.games import GameSpec, InnerAction, OuterAction, PaymentFreeRep, RepEntry, StateSpec
from minimax.norms import KINDS, POLYHEDRAL, WeakNorm
from minimax.representation import YNet
from minimax.risk import RiskSpace


def vector_field(**kwargs):
    return serializers.ListField(child=serializers.FloatField(), min_length=1, **kwargs)


def matrix_field(**kwargs):
    return serializers.ListField(child=vector_field(), **kwargs)


def load(serializer_class, data):
    """Validate `data` and return the domain object; raises DRF ValidationError."""
    serializer = serializer_class(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


class DomainSerializer(serializers.Serializer):
    """Turns the domain constructors' ValueErrors into validation errors."""

    def build(self, validated_data):
        raise NotImplementedError

    def validate(self, attrs):
        try:
            self._built = self.build(attrs)
        except (MinimaxError, ValueError) as exc:
            raise exceptions.ValidationError(str(exc))
        return attrs

    def create(self, validated_data):
        return self._built


class InnerActionSerializer(serializers.Serializer):
    payoff = serializers.FloatField()
    row = vector_field()


class OuterActionSerializer(serializers.Serializer):
    name = serializers.CharField(required=False, default='', allow_blank=True)
    inner = InnerActionSerializer(many=True, allow_empty=False)


class StateSerializer(serializers.Serializer):
    actions = OuterActionSerializer(many=True, allow_empty=False)


class GameSpecSerializer(DomainSerializer):
    n = serializers.IntegerField(min_value=1)
    subprobability = serializers.BooleanField(default=False)
    states = StateSerializer(many=True, allow_empty=False)

    def build(self, attrs):
        states = tuple(
            StateSpec(tuple(
                OuterAction(tuple(InnerAction(move['payoff'], tuple(move['row']))
                                  for move in action['inner']),
                            action.get('name', ''))
                for action in state['actions']))
            for state in attrs['states'])
        return GameSpec(attrs['n'], states, attrs['subprobability'])


class WeakNormSerializer(DomainSerializer):
    kind = serializers.ChoiceField(choices=KINDS)
    n = serializers.IntegerField(min_value=1)
    generators = matrix_field(required=False, min_length=1)

    def build(self, attrs):
        if attrs['kind'] == POLYHEDRAL:
            norm = WeakNorm.polyhedral(attrs.get('generators', []))
            if norm.n != attrs['n']:
                raise ValueError('generators have dimension %d, expected %d'
                                 % (norm.n, attrs['n']))
            return norm
        return WeakNorm(attrs['kind'], attrs['n'])

    def to_representation(self, instance):
        data = {'kind': instance.kind, 'n': instance.n}
        if instance.kind == POLYHEDRAL:
            data['generators'] = instance.generators.tolist()
        return data


class EpsNetSerializer(serializers.Serializer):
    epsilon = serializers.FloatField()
    points = matrix_field()


class YNetSerializer(DomainSerializer):
    normalized = serializers.BooleanField(default=False)
    points = matrix_field(min_length=1)

    def build(self, attrs):
        return YNet(attrs['points'], attrs['normalized'])


class RepEntrySerializer(serializers.Serializer):
    a = vector_field()
    vertices = matrix_field(min_length=1)


class PaymentFreeRepSerializer(DomainSerializer):
    n = serializers.IntegerField(min_value=1)
    states = serializers.ListField(child=RepEntrySerializer(many=True, allow_empty=False),
                                   min_length=1)

    def build(self, attrs):
        states = tuple(tuple(RepEntry(entry['a'], entry['vertices']) for entry in entries)
                       for entries in attrs['states'])
        return PaymentFreeRep(attrs['n'], states)


class RiskSpaceSerializer(DomainSerializer):
    atoms = serializers.ListField(child=serializers.CharField(), min_length=1)
    weights = vector_field()

    def build(self, attrs):
        return RiskSpace(tuple(attrs['atoms']), attrs['weights'])


class AxiomReportSerializer(serializers.Serializer):
    axiom = serializers.CharField()
    holds = serializers.BooleanField()
    samples = serializers.IntegerField(source='samples_used')
    counterexample = serializers.DictField(required=False)

    def to_representation(self, instance):
        data = super().to_representation(instance)
        if data.get('counterexample') is None:
            data.pop('counterexample', None)
        return data


class SuiteResultSerializer(serializers.Serializer):
    """Verdict of an equivalence suite; the per-axiom reports are serialized on their own."""
    name = serializers.CharField(source='suite')
    consistent = serializers.BooleanField()
    left_holds = serializers.BooleanField()
    right_holds = serializers.BooleanField()


class SandwichReportSerializer(serializers.Serializer):
    epsilon = serializers.FloatField()
    max_lower_violation = serializers.FloatField()
    max_upper_excess = serializers.FloatField()
    samples = serializers.IntegerField()
    seed = serializers.IntegerField()
    holds = serializers.BooleanField()


class RepresentationResultSerializer(serializers.Serializer):
    x = vector_field()
    value = serializers.FloatField()
    argmin_y = vector_field()
    argmax_p = vector_field()
    argmax_index = serializers.IntegerField(allow_null=True)
